#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "silico/acquisition.hpp"
#include "silico/preprocessing.hpp"

namespace silico {

using EmbeddingVector = std::vector<double>;

/// Row-major float32 matrix with one row per record id.
struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<std::string> record_ids;
  std::vector<float> data;
  std::string provider_tag;

  std::size_t rows() const { return record_ids.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::span<float> row(std::size_t i) { return {data.data() + i * dim, dim}; }

  /// Throws Validation when shape, uniqueness or finiteness is violated.
  void validate() const;

  bool operator==(const EmbeddingMatrix&) const = default;
};

enum class ProviderKind { Offline, Remote };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Offline;
  std::string endpoint;                     // remote only
  std::string model = "text-embedding-3-large";
  std::size_t dim = 3072;
  std::size_t batch_size = 64;
  RetryPolicy retry{3, std::chrono::milliseconds(1000), std::chrono::milliseconds(30000)};
  std::size_t max_in_flight = 4;
  std::filesystem::path cache_dir;          // empty disables the disk cache
  std::uint64_t seed = 0;                   // offline only
  std::string api_key;
  // Remote wire profile.
  std::string input_field = "input";
  std::string response_list_field = "data";  // empty: response root is the list
  std::string vector_field = "embedding";    // empty: list items are bare arrays

  std::string provider_tag() const;
};

ProviderKind parse_provider_kind(std::string_view name);

/// Hashed character-trigram bag through a seeded signed random projection,
/// L2-normalized. Deterministic across runs and platforms.
EmbeddingVector offline_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// One file per content hash plus an append-only index manifest. Distinct
/// keys may be written concurrently.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir);

  static std::string key(std::string_view provider_tag, std::string_view normalized_text);

  std::optional<std::vector<float>> get(const std::string& key, std::size_t dim) const;
  void put(const std::string& key, std::span<const float> values, std::string_view provider_tag);
  bool enabled() const { return !dir_.empty(); }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path dir_;
  std::mutex index_mutex_;
};

struct EmbedStats {
  std::size_t cache_hits = 0;
  std::size_t computed = 0;
  std::size_t remote_calls = 0;
};

/// Sends one batch to the remote provider; returns one vector per input.
std::vector<std::vector<float>> remote_embed_batch(const ProviderConfig& provider,
                                                   const std::vector<std::string>& texts);

EmbeddingMatrix embed_corpus(const RefinedCorpus& corpus, const ProviderConfig& provider,
                             EmbedStats* stats = nullptr);

/// Binary layout: "SEMX", u32 version, u32 dim, u64 count, u32 tag length,
/// tag bytes, then row-major little-endian float32. Ids go to `<path>.ids.json`.
void save_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix load_matrix(const std::filesystem::path& path);
std::filesystem::path ids_sidecar_path(const std::filesystem::path& path);

}  // namespace silico
