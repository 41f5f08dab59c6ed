#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace silico {

struct RunConfig {
  std::filesystem::path out_dir = "run";
  std::uint64_t seed = 42;  // master seed; every stage seed derives from it
  bool force = false;

  // crawl
  std::string base_url;
  std::string crawl_path = "/api/v1/submolts";
  std::string pagination = "page-number";
  std::size_t page_size = 100;
  double requests_per_second = 2.0;
  std::size_t crawl_retries = 5;
  std::string api_key_env = "SILICO_API_KEY";
  std::filesystem::path snapshot;  // replay an existing snapshot instead of crawling

  // preprocess
  std::size_t threshold = 3;

  // embed
  std::string embed_provider = "offline";
  std::string embed_endpoint;
  std::string embed_model = "text-embedding-3-large";
  std::size_t dim = 3072;
  std::size_t embed_batch = 64;
  std::size_t embed_in_flight = 4;
  std::filesystem::path cache_dir;  // default <out_dir>/cache/embeddings
  std::string embed_key_env = "SILICO_EMBED_KEY";

  // cluster
  std::size_t k_min = 2;
  std::size_t k_max = 15;
  std::size_t k_fixed = 0;  // nonzero skips elbow selection
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  bool normalize = false;

  // project
  double perplexity = 30.0;
  std::size_t tsne_iterations = 1000;
  double learning_rate = 0.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double theta = 0.5;
  std::size_t exact_threshold = 2000;
  std::size_t pca_dims = 0;

  // ngrams
  std::size_t n_min = 2;
  std::size_t n_max = 5;

  // render
  double canvas_width = 800;
  double canvas_height = 600;
  std::size_t max_phrases = 60;
  double font_min = 10;
  double font_max = 48;
  std::size_t png_width = 0;  // 0: SVG only

  // discover
  std::string vlm_provider = "stub";
  std::string vlm_endpoint;
  std::string vlm_model = "gemini-3-pro";
  std::string vlm_profile = "openai-chat";
  std::filesystem::path vlm_response;  // canned provider
  std::string vlm_key_env = "SILICO_VLM_KEY";

  // review
  std::filesystem::path edits;
  std::string approver = "reviewer";

  /// Dotted keys such as "cluster.k_max". Throws Validation on unknown keys
  /// or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  /// SILICO_BASE_URL, SILICO_OUT_DIR, SILICO_SEED.
  void load_env();
  /// JSON object, nested by section or flat with dotted keys.
  void load_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  void validate() const;
  std::filesystem::path stage_dir(std::string_view stage) const { return out_dir / std::string(stage); }
};

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"crawl",    "preprocess", "embed",    "cluster", "project",
                                              "ngrams",   "render",     "discover", "review",  "report"};
  return names;
}

struct StageOutcome {
  std::string stage;
  bool cached = false;  // digest matched a previous run; nothing recomputed
  std::filesystem::path dir;
};

StageOutcome run_stage(const RunConfig& config, const std::string& stage);
std::vector<StageOutcome> run_pipeline(const RunConfig& config);

}  // namespace silico
