#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "silico/acquisition.hpp"
#include "silico/wordcloud.hpp"

namespace silico {

enum class Category { HumanMimicry, SiliconCentricity, Noise };

std::string_view category_key(Category c);      // "HumanMimicry"
std::string_view category_display(Category c);  // "Human Mimicry"
/// Case-, space- and punctuation-insensitive match against the vocabulary.
std::optional<Category> match_category(std::string_view text);

struct PromptTemplate {
  std::string text;  // placeholders: {K} and {LAST}
  std::string version;
};

const PromptTemplate& default_prompt_template();
std::string assemble_prompt(std::size_t k, const PromptTemplate& tmpl = default_prompt_template());

struct ClusterFinding {
  std::size_t cluster_index = 0;
  std::string title;
  std::string thematic_summary;
  std::string sociological_insight;
  std::set<Category> categories;
  std::vector<std::string> unmapped;  // category strings outside the vocabulary
  bool flagged = false;

  bool operator==(const ClusterFinding&) const = default;
};

struct RawThematicReport {
  std::vector<ClusterFinding> findings;
  std::string provider_tag;
  std::string prompt_version;
  std::string image_digest;
  std::string response_text;
};

enum class EditField { ThematicSummary, SociologicalInsight, Categories };

struct ReviewEdit {
  std::size_t cluster_index = 0;
  EditField field = EditField::ThematicSummary;
  std::string text_value;          // summary / insight edits
  std::set<Category> category_value;
  std::string reviewer;
  std::string rationale;
  std::string timestamp;
};

struct FinalThematicReport {
  RawThematicReport base;
  std::vector<ReviewEdit> edits;
  std::vector<ClusterFinding> findings;
  std::string approved_by;
  std::string approved_at;
};

/// Accepts a markdown table or a labeled list. Throws Validation unless the
/// response covers exactly clusters 0..k-1, each once.
std::vector<ClusterFinding> parse_report(std::string_view text, std::size_t k);

// ---------------------------------------------------------------------------
// Multimodal providers

struct VlmConfig {
  enum class Kind { Stub, Canned, Remote };
  Kind kind = Kind::Stub;
  std::string endpoint;
  std::string model = "gemini-3-pro";
  std::string api_key;
  std::string profile = "openai-chat";  // or "simple"
  std::filesystem::path canned_response;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{2000};
};

VlmConfig::Kind parse_vlm_kind(std::string_view name);

class MultimodalProvider {
 public:
  virtual ~MultimodalProvider() = default;
  virtual std::string tag() const = 0;
  virtual std::string complete(const std::string& prompt, const VisualFeatureSet& image) = 0;
};

std::unique_ptr<MultimodalProvider> make_provider(const VlmConfig& config);

/// Offline stand-in: reads the composed SVG and answers with a table built
/// from each panel's most prominent phrases.
std::string stub_response(const std::string& composed_svg);

/// R_raw = M(I, prompt). On a parse failure the verbatim response is kept in
/// `failure_dir` and the thrown error names the file.
RawThematicReport discover(const VisualFeatureSet& image, const std::string& prompt, std::size_t k,
                           MultimodalProvider& provider, const std::filesystem::path& failure_dir,
                           const std::string& prompt_version = default_prompt_template().version);

// ---------------------------------------------------------------------------
// Human review

std::vector<ReviewEdit> load_edits(const std::filesystem::path& path);
std::vector<ReviewEdit> parse_edits(std::string_view jsonl);

FinalThematicReport apply_review(const RawThematicReport& raw, const std::vector<ReviewEdit>& edits,
                                 const std::string& approver, std::string approved_at = {});

nlohmann::json raw_report_json(const RawThematicReport& report);
RawThematicReport raw_report_from_json(const nlohmann::json& j);
nlohmann::json final_report_json(const FinalThematicReport& report);

/// Columns: No., Cluster, Theme, Sociological Insight, Category.
std::string render_markdown_table(const std::vector<ClusterFinding>& findings);

}  // namespace silico
