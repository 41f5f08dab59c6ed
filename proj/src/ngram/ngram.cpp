#include "silico/ngram.hpp"

#include <algorithm>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "silico/text.hpp"
#include "silico/util.hpp"

namespace silico {

TokenStream tokenize(std::string_view input, std::string record_id) {
  return {text::word_tokens(input), std::move(record_id)};
}

PhraseCounts extract_ngrams(const TokenStream& stream, std::size_t n_min, std::size_t n_max) {
  require(n_min >= 1 && n_min <= n_max, ErrorKind::Validation, "n-gram range needs 1 <= n_min <= n_max");
  PhraseCounts out;
  const auto& t = stream.tokens;
  for (std::size_t start = 0; start < t.size(); ++start) {
    std::string phrase;
    for (std::size_t len = 1; len <= n_max && start + len <= t.size(); ++len) {
      if (len > 1) phrase.push_back(' ');
      phrase += t[start + len - 1];
      if (len >= n_min) ++out[phrase];
    }
  }
  return out;
}

void merge_counts(PhraseCounts& into, const PhraseCounts& other) {
  for (const auto& [phrase, count] : other) into[phrase] += count;
}

NGramProfile profile_cluster(const RefinedCorpus& corpus, const ClusterModel& model, std::size_t cluster_index,
                             std::size_t n_min, std::size_t n_max) {
  require(cluster_index < model.k, ErrorKind::Validation,
          "cluster index " + std::to_string(cluster_index) + " out of range for K = " + std::to_string(model.k));
  std::unordered_map<std::string_view, std::uint32_t> cluster_of;
  for (std::size_t i = 0; i < model.record_ids.size(); ++i) cluster_of[model.record_ids[i]] = model.assignments[i];

  NGramProfile profile;
  profile.cluster_index = cluster_index;
  profile.n_min = n_min;
  profile.n_max = n_max;
  for (const auto& r : corpus.records) {
    auto it = cluster_of.find(r.id);
    require(it != cluster_of.end(), ErrorKind::Validation, "record " + r.id + " has no cluster assignment");
    if (it->second != cluster_index) continue;
    ++profile.member_count;
    merge_counts(profile.counts, extract_ngrams(tokenize(r.description, r.id), n_min, n_max));
  }
  return profile;
}

std::vector<std::pair<std::string, std::uint64_t>> top_phrases(const NGramProfile& profile, std::size_t limit) {
  require(limit >= 1, ErrorKind::Validation, "phrase limit must be at least 1");
  std::vector<std::pair<std::string, std::uint64_t>> all(profile.counts.begin(), profile.counts.end());
  const auto keep = std::min(limit, all.size());
  // counts is a sorted map, so a stable sort on count alone keeps ties ascending.
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  all.resize(keep);
  return all;
}

void save_profile(const NGramProfile& p, const std::filesystem::path& path) {
  nlohmann::json j = {{"cluster", p.cluster_index}, {"n_min", p.n_min},
                      {"n_max", p.n_max},           {"member_count", p.member_count},
                      {"tokenizer_version", p.tokenizer_version}, {"counts", p.counts}};
  write_file_atomic(path, j.dump(1) + "\n");
}

NGramProfile load_profile(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("n-gram profile is not JSON: ") + e.what());
  }
  NGramProfile p;
  p.cluster_index = j.at("cluster").get<std::size_t>();
  p.n_min = j.at("n_min").get<std::size_t>();
  p.n_max = j.at("n_max").get<std::size_t>();
  p.member_count = j.at("member_count").get<std::size_t>();
  p.tokenizer_version = j.value("tokenizer_version", std::string(kTokenizerVersion));
  p.counts = j.at("counts").get<PhraseCounts>();
  return p;
}

}  // namespace silico
