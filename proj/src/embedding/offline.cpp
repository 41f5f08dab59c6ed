#include <cmath>
#include <map>

#include "silico/embedding.hpp"
#include "silico/text.hpp"
#include "silico/util.hpp"

namespace silico {

EmbeddingVector offline_embed(std::string_view input, std::size_t dim, std::uint64_t seed) {
  require(dim >= 2, ErrorKind::Validation, "embedding dimension must be at least 2");
  const std::string normalized = text::normalize_description(input);
  require(!normalized.empty(), ErrorKind::Validation, "cannot embed empty text");

  // Pad so word-initial and word-final characters form their own trigrams.
  auto cps = text::codepoints(" " + text::casefold(normalized) + " ");
  std::map<std::uint64_t, std::int64_t> bag;
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    ++bag[fnv1a64(cps[i] + cps[i + 1] + cps[i + 2])];
  }

  // Integer accumulation keeps the pre-normalization vector exact.
  std::vector<std::int64_t> acc(dim, 0);
  for (const auto& [feature, count] : bag) {
    std::uint64_t state = seed ^ feature;
    for (std::size_t base = 0; base < dim; base += 64) {
      const std::uint64_t bits = splitmix64(state);
      const std::size_t end = std::min<std::size_t>(dim, base + 64);
      for (std::size_t j = base; j < end; ++j) {
        acc[j] += ((bits >> (j - base)) & 1U) ? count : -count;
      }
    }
  }

  double sq = 0.0;
  for (auto v : acc) sq += static_cast<double>(v) * static_cast<double>(v);
  require(sq > 0.0, ErrorKind::Internal, "offline projection produced a zero vector");
  const double norm = std::sqrt(sq);
  EmbeddingVector out(dim);
  for (std::size_t j = 0; j < dim; ++j) out[j] = static_cast<double>(acc[j]) / norm;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Validation, "cosine similarity of vectors with different dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  require(na > 0.0 && nb > 0.0, ErrorKind::Validation, "cosine similarity of a zero vector");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace silico
