#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "silico/acquisition.hpp"
#include "silico/log.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  const double scaled = static_cast<double>(initial_backoff.count()) * std::ldexp(1.0, std::min(attempt, 30));
  return std::chrono::milliseconds(static_cast<long long>(std::min(scaled, static_cast<double>(max_backoff.count()))));
}

Pagination parse_pagination(std::string_view name) {
  if (name == "page-number" || name == "page") return Pagination::PageNumber;
  if (name == "cursor") return Pagination::Cursor;
  fail(ErrorKind::Validation, "unknown pagination scheme '" + std::string(name) + "'");
}

RateLimiter::RateLimiter(double per_second, double burst)
    : rate_(per_second), capacity_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)), last_(Clock::now()) {
  require(per_second > 0.0, ErrorKind::Validation, "rate limit must be positive");
}

void RateLimiter::acquire() {
  auto now = Clock::now();
  tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
  last_ = now;
  if (tokens_ < 1.0) {
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    std::this_thread::sleep_for(wait);
    last_ = Clock::now();
    tokens_ = 1.0;
  }
  tokens_ -= 1.0;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  require(scheme_end != std::string::npos, ErrorKind::Validation, "base URL must include a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

std::optional<std::chrono::milliseconds> retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  try {
    return std::chrono::milliseconds(static_cast<long long>(std::stod(res.get_header_value("Retry-After")) * 1000.0));
  } catch (const std::exception&) {
    return std::nullopt;  // HTTP-date form is not supported; fall back to backoff
  }
}

}  // namespace

struct SubmoltClient::Impl {
  std::unique_ptr<httplib::Client> http;
  std::string path;
};

SubmoltClient::SubmoltClient(ClientConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()), limiter_(config_.requests_per_second) {
  require(config_.page_size >= 1, ErrorKind::Validation, "page size must be at least 1");
  require(!config_.base_url.empty(), ErrorKind::Validation, "base URL is not configured");
  const auto parts = split_url(config_.base_url);
  impl_->http = std::make_unique<httplib::Client>(parts.origin);
  impl_->http->set_connection_timeout(config_.timeout);
  impl_->http->set_read_timeout(config_.timeout);
  impl_->path = parts.prefix + config_.path;
}

SubmoltClient::~SubmoltClient() = default;

PageResult SubmoltClient::fetch_page(const std::optional<std::string>& cursor) {
  httplib::Params params{{"limit", std::to_string(config_.page_size)}};
  std::size_t page_number = 1;
  if (cursor) {
    if (config_.pagination == Pagination::PageNumber) {
      page_number = std::stoul(*cursor);
      params.emplace("page", *cursor);
    } else {
      params.emplace("cursor", *cursor);
    }
  } else if (config_.pagination == Pagination::PageNumber) {
    params.emplace("page", "1");
  }
  httplib::Headers headers{{"Accept", "application/json"}};
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string body;
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    ++requests_;
    auto res = impl_->http->Get(impl_->path, params, headers);
    std::optional<std::chrono::milliseconds> wait;
    std::string problem;
    if (!res) {
      problem = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      body = res->body;
      break;
    } else if (res->status == 429) {
      problem = "HTTP 429";
      wait = retry_after(*res);
    } else if (res->status >= 500) {
      problem = "HTTP " + std::to_string(res->status);
    } else {
      fail(ErrorKind::Provider, "GET " + impl_->path + " failed with HTTP " + std::to_string(res->status));
    }
    if (attempt >= config_.retry.max_retries) {
      fail(ErrorKind::Provider, "GET " + impl_->path + " gave up after " + std::to_string(attempt + 1) +
                                    " attempts: " + problem);
    }
    const auto delay = wait ? std::min(*wait, config_.retry.max_backoff) : config_.retry.backoff(attempt);
    log().warn("{} on {}; retrying in {} ms", problem, impl_->path, delay.count());
    std::this_thread::sleep_for(delay);
  }

  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorKind::Provider, std::string("listing response is not JSON: ") + e.what());
  }
  const json* items = nullptr;
  if (doc.is_array()) {
    items = &doc;
  } else if (doc.is_object() && doc.contains(config_.records_field) && doc[config_.records_field].is_array()) {
    items = &doc[config_.records_field];
  } else {
    fail(ErrorKind::Provider, "listing response has no '" + config_.records_field + "' array");
  }

  PageResult out;
  for (const auto& item : *items) {
    if (auto rec = decode_record(item)) {
      out.records.push_back(std::move(*rec));
    } else {
      ++out.malformed;
      log().warn("skipping malformed record on page {}: {}", page_number, item.dump().substr(0, 200));
    }
  }

  if (config_.pagination == Pagination::Cursor) {
    if (doc.is_object()) {
      auto it = doc.find("next_cursor");
      if (it != doc.end() && it->is_string() && !it->get<std::string>().empty()) out.next = it->get<std::string>();
    }
  } else {
    bool more = items->size() >= config_.page_size;
    if (doc.is_object() && doc.contains("has_more") && doc["has_more"].is_boolean()) more = doc["has_more"].get<bool>();
    if (more && !items->empty()) out.next = std::to_string(page_number + 1);
  }
  return out;
}

PageResult fetch_page(const ClientConfig& config, const std::optional<std::string>& cursor) {
  SubmoltClient client(config);
  return client.fetch_page(cursor);
}

CorpusSnapshot crawl_all(const ClientConfig& config) {
  SubmoltClient client(config);
  CorpusSnapshot snap;
  snap.base_url = config.base_url;
  snap.tool_version = std::string(kToolVersion);
  snap.fetched_at = utc_now_iso8601();

  std::set<std::string, std::less<>> seen;
  std::optional<std::string> cursor;
  std::set<std::string, std::less<>> visited_cursors;
  auto finish = [&](bool complete) {
    snap.complete = complete;
    snap.snapshot_id = compute_snapshot_id(snap.records);
  };
  try {
    do {
      PageResult page = client.fetch_page(cursor);
      ++snap.pages_fetched;
      snap.malformed += page.malformed;
      for (auto& r : page.records) {
        if (!seen.insert(r.id).second) {
          ++snap.collisions;
          log().info("duplicate record id {} on page {}; keeping first occurrence", r.id, snap.pages_fetched);
          continue;
        }
        snap.records.push_back(std::move(r));
      }
      cursor = std::move(page.next);
      if (cursor && !visited_cursors.insert(*cursor).second) {
        fail(ErrorKind::Provider, "server returned a cursor it already served: " + *cursor);
      }
    } while (cursor);
  } catch (const Error& e) {
    finish(false);
    throw CrawlInterrupted(e.what(), std::move(snap));
  }
  finish(true);
  log().info("crawl finished: {} records over {} pages ({} malformed, {} collisions)", snap.records.size(),
             snap.pages_fetched, snap.malformed, snap.collisions);
  return snap;
}

}  // namespace silico
