#include "silico/preprocessing.hpp"

#include <unordered_map>

#include <nlohmann/json.hpp>

#include "silico/text.hpp"
#include "silico/util.hpp"

namespace silico {

FilterResult prune_sparse(std::vector<SubmoltRecord> records) {
  FilterResult out;
  out.kept.reserve(records.size());
  for (auto& r : records) {
    if (text::normalize_description(r.description).empty()) {
      ++out.removed;
    } else {
      out.kept.push_back(std::move(r));
    }
  }
  return out;
}

FilterResult eliminate_templates(std::vector<SubmoltRecord> records, std::size_t threshold) {
  require(threshold >= 1, ErrorKind::Validation, "template frequency threshold must be at least 1");
  std::vector<std::string> keys;
  keys.reserve(records.size());
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    keys.push_back(text::normalize_description(r.description));
    ++counts[keys.back()];
  }
  FilterResult out;
  out.kept.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (counts[keys[i]] > threshold) {
      ++out.removed;
    } else {
      out.kept.push_back(std::move(records[i]));
    }
  }
  return out;
}

RefinedCorpus refine(const CorpusSnapshot& snapshot, std::size_t threshold) {
  RefinedCorpus corpus;
  corpus.source_snapshot_id = snapshot.snapshot_id;
  corpus.input_count = snapshot.records.size();
  corpus.frequency_threshold = threshold;
  auto sparse = prune_sparse(snapshot.records);
  corpus.pruned_sparse = sparse.removed;
  auto templates = eliminate_templates(std::move(sparse.kept), threshold);
  corpus.pruned_template = templates.removed;
  corpus.records = std::move(templates.kept);
  return corpus;
}

nlohmann::json refinement_audit(const RefinedCorpus& c) {
  return {
      {"source_snapshot_id", c.source_snapshot_id},
      {"input", c.input_count},
      {"pruned_sparse", c.pruned_sparse},
      {"pruned_template", c.pruned_template},
      {"output", c.records.size()},
      {"threshold", c.frequency_threshold},
      {"normalization_version", c.normalization_version},
  };
}

void save_refined(const RefinedCorpus& corpus, const std::filesystem::path& records_path,
                  const std::filesystem::path& audit_path) {
  CorpusSnapshot as_snapshot;
  as_snapshot.snapshot_id = corpus.source_snapshot_id;
  as_snapshot.base_url = "refined";
  as_snapshot.fetched_at = "";
  as_snapshot.tool_version = std::string(kToolVersion);
  as_snapshot.records = corpus.records;
  save_snapshot(as_snapshot, records_path);
  write_file_atomic(audit_path, refinement_audit(corpus).dump(2) + "\n");
}

RefinedCorpus load_refined(const std::filesystem::path& records_path, const std::filesystem::path& audit_path) {
  auto snap = load_snapshot(records_path);
  nlohmann::json audit;
  try {
    audit = nlohmann::json::parse(read_file(audit_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("refinement audit is not JSON: ") + e.what());
  }
  RefinedCorpus c;
  c.source_snapshot_id = snap.snapshot_id;
  c.records = std::move(snap.records);
  c.input_count = audit.value("input", std::size_t{0});
  c.pruned_sparse = audit.value("pruned_sparse", std::size_t{0});
  c.pruned_template = audit.value("pruned_template", std::size_t{0});
  c.frequency_threshold = audit.value("threshold", std::size_t{3});
  c.normalization_version = audit.value("normalization_version", std::string(kNormalizationVersion));
  require(audit.value("output", c.records.size()) == c.records.size(), ErrorKind::Validation,
          "refinement audit output count does not match records");
  return c;
}

}  // namespace silico
