#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "silico/error.hpp"

namespace silico {

/// One sub-community as served by the platform's discovery endpoint.
struct SubmoltRecord {
  std::string id;
  std::string name;
  std::optional<std::string> display_name;
  std::string description;  // verbatim bytes; empty when absent upstream
  std::optional<std::string> created_at;
  std::optional<std::string> creator;
  std::map<std::string, std::string> extra;

  bool operator==(const SubmoltRecord&) const = default;
};

struct CorpusSnapshot {
  std::string snapshot_id;
  std::string base_url;
  std::string fetched_at;
  std::string tool_version;
  std::vector<SubmoltRecord> records;
  std::size_t pages_fetched = 0;
  bool complete = true;
  std::size_t malformed = 0;
  std::size_t collisions = 0;

  bool operator==(const CorpusSnapshot&) const = default;
};

inline constexpr std::string_view kSnapshotSchema = "snapshot/1";

/// Decodes one upstream JSON object. Returns nullopt when `id` or `name` is
/// missing or not a scalar; unknown fields land in `extra`.
std::optional<SubmoltRecord> decode_record(const nlohmann::json& obj);
nlohmann::json encode_record(const SubmoltRecord& record);

/// Content-derived identifier: the same records always give the same id.
std::string compute_snapshot_id(const std::vector<SubmoltRecord>& records);

std::string serialize_snapshot(const CorpusSnapshot& snapshot);
CorpusSnapshot parse_snapshot(std::string_view text);
void save_snapshot(const CorpusSnapshot& snapshot, const std::filesystem::path& path);
CorpusSnapshot load_snapshot(const std::filesystem::path& path);

/// Where a partial crawl is written next to the intended snapshot path.
std::filesystem::path incomplete_path_for(const std::filesystem::path& snapshot_path);

// ---------------------------------------------------------------------------
// Client

enum class Pagination { PageNumber, Cursor };

struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};

  /// Delay before retry number `attempt` (0-based): initial * 2^attempt, capped.
  std::chrono::milliseconds backoff(int attempt) const;
};

struct ClientConfig {
  std::string base_url;
  std::string path = "/api/v1/submolts";
  Pagination pagination = Pagination::PageNumber;
  std::size_t page_size = 100;
  double requests_per_second = 2.0;
  RetryPolicy retry;
  std::string api_key;  // sent as a bearer token, never logged
  std::string records_field = "submolts";
  std::chrono::seconds timeout{30};
};

Pagination parse_pagination(std::string_view name);

struct PageResult {
  std::vector<SubmoltRecord> records;
  std::optional<std::string> next;  // cursor or page number for the next call
  std::size_t malformed = 0;
};

/// Token bucket; `acquire` blocks until a token is available.
class RateLimiter {
 public:
  RateLimiter(double per_second, double burst = 1.0);
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

/// Read-only client for the discovery endpoint. It has no way to issue
/// anything other than GET.
class SubmoltClient {
 public:
  explicit SubmoltClient(ClientConfig config);
  ~SubmoltClient();
  SubmoltClient(const SubmoltClient&) = delete;
  SubmoltClient& operator=(const SubmoltClient&) = delete;

  PageResult fetch_page(const std::optional<std::string>& cursor);
  std::size_t requests_issued() const { return requests_; }
  const ClientConfig& config() const { return config_; }

 private:
  struct Impl;
  ClientConfig config_;
  std::unique_ptr<Impl> impl_;
  RateLimiter limiter_;
  std::size_t requests_ = 0;
};

PageResult fetch_page(const ClientConfig& config, const std::optional<std::string>& cursor);

/// Thrown when a crawl cannot finish; carries whatever was assembled.
class CrawlInterrupted : public Error {
 public:
  CrawlInterrupted(const std::string& what, CorpusSnapshot partial)
      : Error(ErrorKind::Provider, what), partial_(std::move(partial)) {}
  const CorpusSnapshot& partial() const { return partial_; }

 private:
  CorpusSnapshot partial_;
};

/// Fetches every page in server order, dropping repeated ids.
CorpusSnapshot crawl_all(const ClientConfig& config);

}  // namespace silico
