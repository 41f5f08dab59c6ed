#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "silico/acquisition.hpp"

namespace silico {

inline constexpr std::string_view kNormalizationVersion = "nfc-ws1";

/// The refined subset: sparse and boilerplate records removed, order kept.
struct RefinedCorpus {
  std::string source_snapshot_id;
  std::vector<SubmoltRecord> records;
  std::size_t input_count = 0;
  std::size_t pruned_sparse = 0;
  std::size_t pruned_template = 0;
  std::size_t frequency_threshold = 3;
  std::string normalization_version{kNormalizationVersion};
};

struct FilterResult {
  std::vector<SubmoltRecord> kept;
  std::size_t removed = 0;
};

/// Drops records whose description is empty or whitespace after normalization.
FilterResult prune_sparse(std::vector<SubmoltRecord> records);

/// Drops every record whose normalized description occurs more than
/// `threshold` times in `records`. All copies go, not all-but-one.
FilterResult eliminate_templates(std::vector<SubmoltRecord> records, std::size_t threshold = 3);

RefinedCorpus refine(const CorpusSnapshot& snapshot, std::size_t threshold = 3);

/// `{input, pruned_sparse, pruned_template, output, threshold, normalization_version}`
nlohmann::json refinement_audit(const RefinedCorpus& corpus);

/// Refined corpora are persisted as snapshot-format files plus the audit.
void save_refined(const RefinedCorpus& corpus, const std::filesystem::path& records_path,
                  const std::filesystem::path& audit_path);
RefinedCorpus load_refined(const std::filesystem::path& records_path, const std::filesystem::path& audit_path);

}  // namespace silico
