#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "silico/embedding.hpp"
#include "silico/log.hpp"
#include "silico/text.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

void EmbeddingMatrix::validate() const {
  require(dim >= 1, ErrorKind::Validation, "matrix dimension must be positive");
  require(data.size() == dim * record_ids.size(), ErrorKind::Validation, "matrix data does not match its shape");
  std::set<std::string_view> seen;
  for (const auto& id : record_ids) {
    require(seen.insert(id).second, ErrorKind::Validation, "duplicate record id in matrix: " + id);
  }
  for (float v : data) require(std::isfinite(v), ErrorKind::Validation, "matrix contains a non-finite value");
}

std::string ProviderConfig::provider_tag() const {
  if (kind == ProviderKind::Offline) {
    return "offline:trigram-srp/1:dim=" + std::to_string(dim) + ":seed=" + std::to_string(seed);
  }
  return "remote:" + model + ":dim=" + std::to_string(dim);
}

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "offline") return ProviderKind::Offline;
  if (name == "remote") return ProviderKind::Remote;
  fail(ErrorKind::Validation, "unknown embedding provider kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Cache

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::string EmbeddingCache::key(std::string_view provider_tag, std::string_view normalized_text) {
  std::string material(provider_tag);
  material.push_back('\n');
  material += normalized_text;
  return sha256_hex(material);
}

std::filesystem::path EmbeddingCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".f32");
}

std::optional<std::vector<float>> EmbeddingCache::get(const std::string& key, std::size_t dim) const {
  if (dir_.empty()) return std::nullopt;
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  const std::string bytes = read_file(path);
  if (bytes.size() != dim * 4) {
    log().warn("ignoring cache entry {} with unexpected size {}", key, bytes.size());
    return std::nullopt;
  }
  std::vector<float> out(dim);
  std::size_t pos = 0;
  for (auto& v : out) v = get_f32(bytes, pos);
  return out;
}

void EmbeddingCache::put(const std::string& key, std::span<const float> values, std::string_view provider_tag) {
  if (dir_.empty()) return;
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (float v : values) put_f32(bytes, v);
  write_file_atomic(path_for(key), bytes);
  std::lock_guard lock(index_mutex_);
  std::ofstream index(dir_ / "index.jsonl", std::ios::app);
  index << json{{"key", key}, {"dim", values.size()}, {"provider_tag", provider_tag}}.dump() << "\n";
}

// ---------------------------------------------------------------------------
// Remote provider

std::vector<std::vector<float>> remote_embed_batch(const ProviderConfig& provider,
                                                   const std::vector<std::string>& texts) {
  require(!provider.endpoint.empty(), ErrorKind::Validation, "remote embedding endpoint is not configured");
  const auto scheme_end = provider.endpoint.find("://");
  require(scheme_end != std::string::npos, ErrorKind::Validation, "embedding endpoint needs a scheme");
  const auto path_start = provider.endpoint.find('/', scheme_end + 3);
  const std::string origin = provider.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : provider.endpoint.substr(path_start);

  httplib::Client http(origin);
  http.set_read_timeout(std::chrono::seconds(120));
  httplib::Headers headers;
  if (!provider.api_key.empty()) headers.emplace("Authorization", "Bearer " + provider.api_key);
  const std::string body = json{{"model", provider.model}, {provider.input_field, texts}}.dump();

  for (int attempt = 0;; ++attempt) {
    auto res = http.Post(path, headers, body, "application/json");
    std::string problem;
    if (!res) {
      problem = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      json doc;
      try {
        doc = json::parse(res->body);
      } catch (const json::exception& e) {
        fail(ErrorKind::Provider, std::string("embedding response is not JSON: ") + e.what());
      }
      const json& list = provider.response_list_field.empty() ? doc : doc.at(provider.response_list_field);
      require(list.is_array() && list.size() == texts.size(), ErrorKind::Provider,
              "embedding response does not hold one vector per input");
      std::vector<std::vector<float>> out;
      out.reserve(list.size());
      for (const auto& item : list) {
        const json& vec = provider.vector_field.empty() ? item : item.at(provider.vector_field);
        if (vec.size() != provider.dim) {
          fail(ErrorKind::Validation, "embedding provider returned dimension " + std::to_string(vec.size()) +
                                          ", configured dimension is " + std::to_string(provider.dim));
        }
        out.push_back(vec.get<std::vector<float>>());
      }
      return out;
    } else if (res->status == 429 || res->status >= 500) {
      problem = "HTTP " + std::to_string(res->status);
    } else {
      fail(ErrorKind::Provider, "embedding request failed with HTTP " + std::to_string(res->status));
    }
    if (attempt >= provider.retry.max_retries) {
      fail(ErrorKind::Provider, "embedding provider failed after retries: " + problem);
    }
    std::this_thread::sleep_for(provider.retry.backoff(attempt));
  }
}

// ---------------------------------------------------------------------------

EmbeddingMatrix embed_corpus(const RefinedCorpus& corpus, const ProviderConfig& provider, EmbedStats* stats) {
  require(!corpus.records.empty(), ErrorKind::Validation, "cannot embed an empty corpus");
  require(provider.batch_size >= 1, ErrorKind::Validation, "embedding batch size must be at least 1");
  EmbedStats local;
  EmbedStats& st = stats ? *stats : local;

  const std::string tag = provider.provider_tag();
  EmbeddingCache cache(provider.cache_dir);

  std::vector<std::string> keys;
  std::vector<std::string> normalized;
  keys.reserve(corpus.records.size());
  for (const auto& r : corpus.records) {
    normalized.push_back(text::normalize_description(r.description));
    keys.push_back(EmbeddingCache::key(tag, normalized.back()));
  }

  std::unordered_map<std::string, std::vector<float>> vectors;
  std::vector<std::size_t> missing;  // first index of each key needing computation
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (vectors.contains(keys[i])) continue;
    if (auto hit = cache.get(keys[i], provider.dim)) {
      ++st.cache_hits;
      vectors.emplace(keys[i], std::move(*hit));
    } else {
      vectors.emplace(keys[i], std::vector<float>{});
      missing.push_back(i);
    }
  }

  if (provider.kind == ProviderKind::Offline) {
    for (std::size_t i : missing) {
      const auto v = offline_embed(normalized[i], provider.dim, provider.seed);
      std::vector<float> f(v.begin(), v.end());
      cache.put(keys[i], f, tag);
      vectors[keys[i]] = std::move(f);
      ++st.computed;
    }
  } else {
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t b = 0; b < missing.size(); b += provider.batch_size) {
      batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(b),
                           missing.begin() + static_cast<std::ptrdiff_t>(std::min(missing.size(), b + provider.batch_size)));
    }
    std::mutex results_mutex;
    auto run_batch = [&](const std::vector<std::size_t>& batch) {
      std::vector<std::string> texts;
      for (auto i : batch) texts.push_back(normalized[i]);
      auto result = remote_embed_batch(provider, texts);
      for (std::size_t j = 0; j < batch.size(); ++j) cache.put(keys[batch[j]], result[j], tag);
      std::lock_guard lock(results_mutex);
      for (std::size_t j = 0; j < batch.size(); ++j) vectors[keys[batch[j]]] = std::move(result[j]);
    };
    const std::size_t width = std::max<std::size_t>(1, provider.max_in_flight);
    for (std::size_t start = 0; start < batches.size(); start += width) {
      std::vector<std::future<void>> inflight;
      for (std::size_t b = start; b < std::min(batches.size(), start + width); ++b) {
        inflight.push_back(std::async(std::launch::async, run_batch, std::cref(batches[b])));
      }
      for (auto& f : inflight) f.get();  // rethrows; completed batches stay cached
      st.remote_calls += inflight.size();
    }
    st.computed += missing.size();
  }

  EmbeddingMatrix m;
  m.dim = provider.dim;
  m.provider_tag = tag;
  m.data.reserve(corpus.records.size() * provider.dim);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    m.record_ids.push_back(corpus.records[i].id);
    const auto& v = vectors.at(keys[i]);
    m.data.insert(m.data.end(), v.begin(), v.end());
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Persistence

std::filesystem::path ids_sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".ids.json";
  return p;
}

void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::string out = "SEMX";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(m.dim));
  put_u64(out, m.rows());
  put_u32(out, static_cast<std::uint32_t>(m.provider_tag.size()));
  out += m.provider_tag;
  out.reserve(out.size() + m.data.size() * 4);
  for (float v : m.data) put_f32(out, v);
  write_file_atomic(path, out);
  write_file_atomic(ids_sidecar_path(path), json(m.record_ids).dump() + "\n");
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  require(bytes.size() >= 24 && bytes.compare(0, 4, "SEMX") == 0, ErrorKind::Validation,
          path.string() + " is not a matrix file");
  std::size_t pos = 4;
  const auto version = get_u32(bytes, pos);
  require(version == 1, ErrorKind::Validation, "unsupported matrix file version " + std::to_string(version));
  EmbeddingMatrix m;
  m.dim = get_u32(bytes, pos);
  const auto count = get_u64(bytes, pos);
  const auto tag_len = get_u32(bytes, pos);
  require(pos + tag_len <= bytes.size(), ErrorKind::Validation, "truncated matrix header");
  m.provider_tag = bytes.substr(pos, tag_len);
  pos += tag_len;
  require(bytes.size() - pos == count * m.dim * 4, ErrorKind::Validation, "matrix payload size mismatch");
  m.data.resize(count * m.dim);
  for (auto& v : m.data) v = get_f32(bytes, pos);
  try {
    m.record_ids = json::parse(read_file(ids_sidecar_path(path))).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("matrix id sidecar is invalid: ") + e.what());
  }
  require(m.record_ids.size() == count, ErrorKind::Validation, "matrix id sidecar length mismatch");
  m.validate();
  return m;
}

}  // namespace silico
