#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "silico/acquisition.hpp"

namespace silico {

struct ThemeSpec {
  std::string name;
  std::vector<std::string> vocabulary;  // short phrases; descriptions are stitched from these
  std::size_t count = 0;
};

struct TemplateGroup {
  std::string text;
  std::size_t copies = 0;
};

struct CorpusSpec {
  std::uint64_t seed = 7;
  std::vector<ThemeSpec> themes;
  std::vector<TemplateGroup> template_groups;
  std::size_t sparse_count = 0;
  std::size_t page_size = 100;

  void validate() const;
  std::size_t total() const;
};

/// "eight-themes" (small, for end-to-end runs) or "paper-shape" (12,758 records).
CorpusSpec builtin_spec(std::string_view name);
CorpusSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const CorpusSpec& spec);
CorpusSpec load_spec(const std::filesystem::path& path);

inline constexpr std::string_view kSparseLabel = "sparse";

struct GeneratedCorpus {
  std::vector<SubmoltRecord> records;
  std::vector<std::string> labels;  // parallel to records: theme name, "template:<i>" or "sparse"
  std::uint64_t seed = 0;

  /// {"schema", "seed", "labels": {id: label}}
  nlohmann::json manifest_json() const;
};

GeneratedCorpus generate_corpus(const CorpusSpec& spec);

/// Writes `corpus.snapshot.jsonl` (snapshot format) and `manifest.json` into `dir`.
void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir);

/// id -> label, read back from a manifest file.
std::vector<std::pair<std::string, std::string>> load_manifest(const std::filesystem::path& path);

struct FixtureOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::size_t page_size = 100;
  std::optional<std::size_t> fail_from_page;  // 1-based page at which the server starts answering 500
  std::size_t throttle_first_n = 0;           // first n listing requests get 429
  std::vector<std::string> raw_records;       // appended verbatim as JSON, e.g. malformed entries
};

/// Read-only listing service at GET /api/v1/submolts. Admin routes live under
/// /__fixture/ (log, shutdown). Every request is logged as "METHOD path".
class FixtureServer {
 public:
  FixtureServer(std::vector<SubmoltRecord> records, FixtureOptions options);
  ~FixtureServer();
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  int port() const;
  std::string base_url() const;
  std::vector<std::string> request_log() const;
  void stop();
  /// Blocks until the server stops (via stop() or the shutdown route).
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace silico
