#include "silico/silico.h"

#include <cstring>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "silico/clustering.hpp"
#include "silico/error.hpp"
#include "silico/pipeline.hpp"
#include "silico/projection.hpp"
#include "silico/synthetic.hpp"
#include "silico/thematic.hpp"
#include "silico/util.hpp"

using nlohmann::json;

struct silico_config {
  silico::RunConfig config;
};

struct silico_fixture {
  silico::GeneratedCorpus corpus;
  std::unique_ptr<silico::FixtureServer> server;
};

namespace {

thread_local std::string last_error;

template <typename F>
silico_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return SILICO_OK;
  } catch (const silico::Error& e) {
    last_error = e.what();
    return static_cast<silico_status>(e.kind());
  } catch (const json::exception& e) {
    last_error = e.what();
    return SILICO_ERR_VALIDATION;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return SILICO_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SILICO_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return SILICO_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void need(const void* p, const char* what) {
  silico::require(p != nullptr, silico::ErrorKind::Usage, std::string(what) + " must not be null");
}

silico::CorpusSpec resolve_spec(const char* spec) {
  need(spec, "spec");
  const std::string s(spec);
  if (s == "eight-themes" || s == "paper-shape") return silico::builtin_spec(s);
  return silico::load_spec(s);
}

silico::EmbeddingMatrix to_matrix(const double* rows, std::size_t n, std::size_t dim) {
  silico::EmbeddingMatrix m;
  m.dim = dim;
  m.provider_tag = "caller";
  m.data.resize(n * dim);
  for (std::size_t i = 0; i < n * dim; ++i) m.data[i] = static_cast<float>(rows[i]);
  for (std::size_t i = 0; i < n; ++i) m.record_ids.push_back(std::to_string(i));
  return m;
}

}  // namespace

extern "C" {

const char* silico_version(void) {
  static const std::string v(silico::kToolVersion);
  return v.c_str();
}

const char* silico_last_error(void) { return last_error.c_str(); }

void silico_free_string(char* s) { std::free(s); }

silico_status silico_config_create(silico_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new silico_config{};
  });
}

void silico_config_destroy(silico_config* cfg) { delete cfg; }

silico_status silico_config_load_env(silico_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->config.load_env();
  });
}

silico_status silico_config_load_file(silico_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->config.load_file(path);
  });
}

silico_status silico_config_set(silico_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->config.set(key, value);
  });
}

silico_status silico_config_get(const silico_config* cfg, const char* key, char** out) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(out, "out");
    *out = dup_string(cfg->config.get(key));
  });
}

silico_status silico_config_dump(const silico_config* cfg, char** out_json) {
  return guarded([&] {
    need(cfg, "config");
    need(out_json, "out");
    *out_json = dup_string(cfg->config.to_json().dump(2));
  });
}

silico_status silico_run_stage(const silico_config* cfg, const char* stage, int* cached) {
  return guarded([&] {
    need(cfg, "config");
    need(stage, "stage");
    const auto outcome = silico::run_stage(cfg->config, stage);
    if (cached) *cached = outcome.cached ? 1 : 0;
  });
}

silico_status silico_run_pipeline(const silico_config* cfg, char** summary_json) {
  return guarded([&] {
    need(cfg, "config");
    const auto outcomes = silico::run_pipeline(cfg->config);
    if (summary_json) {
      json arr = json::array();
      for (const auto& o : outcomes) arr.push_back({{"stage", o.stage}, {"cached", o.cached}, {"dir", o.dir.string()}});
      *summary_json = dup_string(arr.dump());
    }
  });
}

silico_status silico_fixture_generate(const char* spec, const char* out_dir, char** summary_json) {
  return guarded([&] {
    need(out_dir, "out_dir");
    const auto s = resolve_spec(spec);
    const auto corpus = silico::generate_corpus(s);
    silico::write_corpus(corpus, out_dir);
    silico::write_file_atomic(std::filesystem::path(out_dir) / "spec.json", silico::spec_to_json(s).dump(2) + "\n");
    if (summary_json) {
      *summary_json = dup_string(json{{"records", corpus.records.size()},
                                      {"snapshot", (std::filesystem::path(out_dir) / "corpus.snapshot.jsonl").string()},
                                      {"manifest", (std::filesystem::path(out_dir) / "manifest.json").string()}}
                                     .dump());
    }
  });
}

silico_status silico_fixture_serve(const char* spec, const char* options_json, silico_fixture** out) {
  return guarded([&] {
    need(out, "out");
    const auto s = resolve_spec(spec);
    silico::FixtureOptions opts;
    opts.page_size = s.page_size;
    if (options_json && *options_json) {
      const auto j = json::parse(options_json);
      opts.host = j.value("host", opts.host);
      opts.port = j.value("port", opts.port);
      opts.page_size = j.value("page_size", opts.page_size);
      if (j.contains("fail_from_page")) opts.fail_from_page = j.at("fail_from_page").get<std::size_t>();
      opts.throttle_first_n = j.value("throttle_first_n", std::size_t{0});
      for (const auto& r : j.value("raw_records", json::array())) opts.raw_records.push_back(r.dump());
    }
    auto fx = std::make_unique<silico_fixture>();
    fx->corpus = silico::generate_corpus(s);
    fx->server = std::make_unique<silico::FixtureServer>(fx->corpus.records, opts);
    *out = fx.release();
  });
}

int silico_fixture_port(const silico_fixture* fx) { return fx ? fx->server->port() : -1; }

silico_status silico_fixture_request_log(const silico_fixture* fx, char** out_json) {
  return guarded([&] {
    need(fx, "fixture");
    need(out_json, "out");
    *out_json = dup_string(json(fx->server->request_log()).dump());
  });
}

silico_status silico_fixture_manifest(const silico_fixture* fx, char** out_json) {
  return guarded([&] {
    need(fx, "fixture");
    need(out_json, "out");
    *out_json = dup_string(fx->corpus.manifest_json().dump());
  });
}

void silico_fixture_stop(silico_fixture* fx) {
  if (fx) fx->server->stop();
}

void silico_fixture_wait(silico_fixture* fx) {
  if (fx) fx->server->wait();
}

void silico_fixture_destroy(silico_fixture* fx) { delete fx; }

silico_status silico_prompt_render(size_t k, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup_string(silico::assemble_prompt(k));
  });
}

silico_status silico_kmeans_fit(const double* rows, size_t n, size_t dim, size_t k, size_t restarts, uint64_t seed,
                                uint32_t* assignments, double* wcss) {
  return guarded([&] {
    need(rows, "rows");
    silico::require(n >= 1 && dim >= 1 && k >= 1 && k <= n && restarts >= 1, silico::ErrorKind::Validation,
                    "k-means needs 1 <= k <= n and at least one restart");
    const auto model = silico::kmeans_best_of(to_matrix(rows, n, dim), k, restarts, seed);
    if (assignments) std::copy(model.assignments.begin(), model.assignments.end(), assignments);
    if (wcss) *wcss = model.wcss;
  });
}

silico_status silico_adjusted_rand_index(const int64_t* a, const int64_t* b, size_t n, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = silico::adjusted_rand_index({a, n}, {b, n});
  });
}

silico_status silico_tsne_run(const double* rows, size_t n, size_t dim, double perplexity, size_t iterations,
                              uint64_t seed, double* points, double* final_kl) {
  return guarded([&] {
    need(rows, "rows");
    need(points, "points");
    silico::TsneOptions opts;
    opts.perplexity = perplexity;
    opts.iterations = iterations;
    const auto proj = silico::tsne(to_matrix(rows, n, dim), seed, opts);
    std::copy(proj.points.begin(), proj.points.end(), points);
    if (final_kl) *final_kl = proj.final_kl;
  });
}

}  // extern "C"
