#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

#include "silico/error.hpp"
#include "silico/pipeline.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

namespace {

struct Binding {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<json(const RunConfig&)> get;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorKind::Validation, "config key " + key + ": '" + value + "' is not " + expected);
}

void parse_into(const std::string&, const std::string& v, std::string& out) { out = v; }
void parse_into(const std::string&, const std::string& v, std::filesystem::path& out) { out = v; }

void parse_into(const std::string& key, const std::string& v, std::size_t& out) {
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "a nonnegative integer");
}

void parse_into(const std::string& key, const std::string& v, double& out) {
  char* end = nullptr;
  out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
}

void parse_into(const std::string& key, const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    out = true;
  } else if (v == "false" || v == "0" || v == "no" || v == "off") {
    out = false;
  } else {
    bad_value(key, v, "a boolean");
  }
}

json to_json_value(const std::filesystem::path& p) { return p.string(); }
template <typename T>
json to_json_value(const T& v) {
  return v;
}

template <typename T>
Binding bind(const std::string& key, T RunConfig::*member) {
  return {[key, member](RunConfig& c, const std::string& v) { parse_into(key, v, c.*member); },
          [member](const RunConfig& c) { return to_json_value(c.*member); }};
}

const std::vector<std::pair<std::string, Binding>>& bindings() {
  static const std::vector<std::pair<std::string, Binding>> table = [] {
    std::vector<std::pair<std::string, Binding>> t;
    auto add = [&t](const std::string& key, auto member) { t.emplace_back(key, bind(key, member)); };
    add("out_dir", &RunConfig::out_dir);
    add("seed", &RunConfig::seed);
    add("force", &RunConfig::force);
    add("crawl.base_url", &RunConfig::base_url);
    add("crawl.path", &RunConfig::crawl_path);
    add("crawl.pagination", &RunConfig::pagination);
    add("crawl.page_size", &RunConfig::page_size);
    add("crawl.requests_per_second", &RunConfig::requests_per_second);
    add("crawl.max_retries", &RunConfig::crawl_retries);
    add("crawl.api_key_env", &RunConfig::api_key_env);
    add("crawl.snapshot", &RunConfig::snapshot);
    add("preprocess.threshold", &RunConfig::threshold);
    add("embed.provider", &RunConfig::embed_provider);
    add("embed.endpoint", &RunConfig::embed_endpoint);
    add("embed.model", &RunConfig::embed_model);
    add("embed.dim", &RunConfig::dim);
    add("embed.batch_size", &RunConfig::embed_batch);
    add("embed.max_in_flight", &RunConfig::embed_in_flight);
    add("embed.cache_dir", &RunConfig::cache_dir);
    add("embed.api_key_env", &RunConfig::embed_key_env);
    add("cluster.k_min", &RunConfig::k_min);
    add("cluster.k_max", &RunConfig::k_max);
    add("cluster.k", &RunConfig::k_fixed);
    add("cluster.restarts", &RunConfig::restarts);
    add("cluster.max_iter", &RunConfig::max_iter);
    add("cluster.tol", &RunConfig::tol);
    add("cluster.normalize", &RunConfig::normalize);
    add("tsne.perplexity", &RunConfig::perplexity);
    add("tsne.iterations", &RunConfig::tsne_iterations);
    add("tsne.learning_rate", &RunConfig::learning_rate);
    add("tsne.exaggeration", &RunConfig::exaggeration);
    add("tsne.exaggeration_iters", &RunConfig::exaggeration_iters);
    add("tsne.theta", &RunConfig::theta);
    add("tsne.exact_threshold", &RunConfig::exact_threshold);
    add("tsne.pca_dims", &RunConfig::pca_dims);
    add("ngram.n_min", &RunConfig::n_min);
    add("ngram.n_max", &RunConfig::n_max);
    add("render.width", &RunConfig::canvas_width);
    add("render.height", &RunConfig::canvas_height);
    add("render.max_phrases", &RunConfig::max_phrases);
    add("render.font_min", &RunConfig::font_min);
    add("render.font_max", &RunConfig::font_max);
    add("render.png_width", &RunConfig::png_width);
    add("discover.provider", &RunConfig::vlm_provider);
    add("discover.endpoint", &RunConfig::vlm_endpoint);
    add("discover.model", &RunConfig::vlm_model);
    add("discover.profile", &RunConfig::vlm_profile);
    add("discover.response", &RunConfig::vlm_response);
    add("discover.api_key_env", &RunConfig::vlm_key_env);
    add("review.edits", &RunConfig::edits);
    add("review.approver", &RunConfig::approver);
    return t;
  }();
  return table;
}

const Binding& find_binding(const std::string& key) {
  for (const auto& [k, b] : bindings()) {
    if (k == key) return b;
  }
  fail(ErrorKind::Validation, "unknown config key: " + key);
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, key, out);
    } else {
      out.emplace_back(key, v);
    }
  }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { find_binding(key).set(*this, value); }

std::string RunConfig::get(const std::string& key) const {
  const auto v = find_binding(key).get(*this);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, b] : bindings()) out.push_back(k);
    return out;
  }();
  return names;
}

void RunConfig::load_env() {
  static const std::pair<const char*, const char*> vars[] = {
      {"SILICO_BASE_URL", "crawl.base_url"}, {"SILICO_OUT_DIR", "out_dir"}, {"SILICO_SEED", "seed"}};
  for (const auto& [var, key] : vars) {
    if (const char* v = std::getenv(var); v && *v) set(key, v);
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, "config file " + path.string() + " is not valid JSON: " + e.what());
  }
  require(doc.is_object(), ErrorKind::Validation, "config file must hold a JSON object");
  std::vector<std::pair<std::string, json>> entries;
  flatten(doc, "", entries);
  for (const auto& [key, v] : entries) {
    if (v.is_string()) {
      set(key, v.get<std::string>());
    } else if (v.is_boolean() || v.is_number()) {
      set(key, v.dump());
    } else {
      fail(ErrorKind::Validation, "config key " + key + " must be a string, number or boolean");
    }
  }
}

json RunConfig::to_json() const {
  json out = json::object();
  for (const auto& [k, b] : bindings()) out[k] = b.get(*this);
  return out;
}

void RunConfig::validate() const {
  require(!out_dir.empty(), ErrorKind::Validation, "out_dir must be set");
  require(pagination == "page-number" || pagination == "page" || pagination == "cursor", ErrorKind::Validation,
          "crawl.pagination must be page-number or cursor");
  require(page_size >= 1, ErrorKind::Validation, "crawl.page_size must be at least 1");
  require(requests_per_second > 0, ErrorKind::Validation, "crawl.requests_per_second must be positive");
  require(threshold >= 1, ErrorKind::Validation, "preprocess.threshold must be at least 1");
  require(embed_provider == "offline" || embed_provider == "remote", ErrorKind::Validation,
          "embed.provider must be offline or remote");
  require(dim >= 2, ErrorKind::Validation, "embed.dim must be at least 2");
  require(embed_batch >= 1 && embed_in_flight >= 1, ErrorKind::Validation, "embed batch settings must be positive");
  require(k_min >= 1 && k_min <= k_max, ErrorKind::Validation, "cluster.k_min must be in [1, k_max]");
  require(restarts >= 1, ErrorKind::Validation, "cluster.restarts must be at least 1");
  require(max_iter >= 1 && tol >= 0, ErrorKind::Validation, "cluster.max_iter and cluster.tol out of range");
  require(perplexity > 0 && tsne_iterations >= 1, ErrorKind::Validation, "t-SNE settings out of range");
  require(n_min >= 1 && n_min <= n_max, ErrorKind::Validation, "ngram range must satisfy 1 <= n_min <= n_max");
  require(canvas_width >= 200 && canvas_height >= 200, ErrorKind::Validation, "render canvas must be at least 200x200");
  require(font_min > 0 && font_min <= font_max, ErrorKind::Validation, "render font range out of order");
  require(vlm_provider == "stub" || vlm_provider == "canned" || vlm_provider == "remote", ErrorKind::Validation,
          "discover.provider must be stub, canned or remote");
  if (!snapshot.empty()) {
    require(std::filesystem::exists(snapshot), ErrorKind::MissingInput, "snapshot not found: " + snapshot.string());
  }
  if (!edits.empty()) {
    require(std::filesystem::exists(edits), ErrorKind::MissingInput, "edits file not found: " + edits.string());
  }
  if (vlm_provider == "canned") {
    require(std::filesystem::exists(vlm_response), ErrorKind::MissingInput,
            "canned response not found: " + vlm_response.string());
  }
}

}  // namespace silico
