#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "silico/clustering.hpp"
#include "silico/preprocessing.hpp"

namespace silico {

inline constexpr std::string_view kTokenizerVersion = "casefold-alnum/1";

struct TokenStream {
  std::vector<std::string> tokens;
  std::string source_record_id;
};

using PhraseCounts = std::map<std::string, std::uint64_t>;

struct NGramProfile {
  std::size_t cluster_index = 0;
  PhraseCounts counts;
  std::size_t n_min = 2;
  std::size_t n_max = 5;
  std::size_t member_count = 0;
  std::string tokenizer_version{kTokenizerVersion};

  bool operator==(const NGramProfile&) const = default;
};

TokenStream tokenize(std::string_view text, std::string record_id = {});

/// Every contiguous window of length n_min..n_max, joined by single spaces.
PhraseCounts extract_ngrams(const TokenStream& stream, std::size_t n_min = 2, std::size_t n_max = 5);

/// Adds `other` into `into`. Commutative, so merge order never matters.
void merge_counts(PhraseCounts& into, const PhraseCounts& other);

NGramProfile profile_cluster(const RefinedCorpus& corpus, const ClusterModel& model, std::size_t cluster_index,
                             std::size_t n_min = 2, std::size_t n_max = 5);

/// Highest counts first, ties in ascending phrase order.
std::vector<std::pair<std::string, std::uint64_t>> top_phrases(const NGramProfile& profile, std::size_t limit);

/// `{cluster, n_min, n_max, member_count, tokenizer_version, counts}`
void save_profile(const NGramProfile& profile, const std::filesystem::path& path);
NGramProfile load_profile(const std::filesystem::path& path);

}  // namespace silico
