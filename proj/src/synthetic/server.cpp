#include <httplib.h>

#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "silico/error.hpp"
#include "silico/log.hpp"
#include "silico/synthetic.hpp"

namespace silico {

using nlohmann::json;

namespace {

std::optional<std::size_t> to_size(const std::string& s) {
  if (s.empty() || s.size() > 12 || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

struct FixtureServer::Impl {
  FixtureOptions options;
  std::vector<std::string> items;  // pre-serialized JSON objects
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mu;
  std::vector<std::string> log;
  std::size_t listing_requests = 0;

  void handle_list(const httplib::Request& req, httplib::Response& res) {
    std::size_t seen;
    {
      std::lock_guard lock(mu);
      seen = listing_requests++;
    }
    if (seen < options.throttle_first_n) {
      res.status = 429;
      res.set_header("Retry-After", "0");
      res.set_content(R"({"error":"rate limited"})", "application/json");
      return;
    }

    std::size_t limit = options.page_size;
    if (req.has_param("limit")) {
      const auto v = to_size(req.get_param_value("limit"));
      if (!v || *v == 0) {
        res.status = 400;
        res.set_content(R"({"error":"bad limit"})", "application/json");
        return;
      }
      limit = std::min<std::size_t>(*v, 1000);
    }
    std::size_t offset = 0;
    if (req.has_param("cursor")) {
      const auto v = to_size(req.get_param_value("cursor"));
      if (!v) {
        res.status = 400;
        res.set_content(R"({"error":"bad cursor"})", "application/json");
        return;
      }
      offset = *v;
    } else if (req.has_param("page")) {
      const auto v = to_size(req.get_param_value("page"));
      if (!v || *v == 0) {
        res.status = 400;
        res.set_content(R"({"error":"bad page"})", "application/json");
        return;
      }
      offset = (*v - 1) * limit;
    }
    const std::size_t page = offset / limit + 1;
    if (options.fail_from_page && page >= *options.fail_from_page) {
      res.status = 500;
      res.set_content(R"({"error":"injected failure"})", "application/json");
      return;
    }

    const std::size_t begin = std::min(offset, items.size());
    const std::size_t end = std::min(begin + limit, items.size());
    const bool more = end < items.size();
    std::string body = "{\"submolts\":[";
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) body += ',';
      body += items[i];
    }
    body += "],\"page\":" + std::to_string(page) + ",\"limit\":" + std::to_string(limit) +
            ",\"total\":" + std::to_string(items.size()) + ",\"has_more\":" + (more ? "true" : "false") +
            ",\"next_cursor\":" + (more ? "\"" + std::to_string(end) + "\"" : "null") + "}";
    res.set_content(body, "application/json");
  }
};

FixtureServer::FixtureServer(std::vector<SubmoltRecord> records, FixtureOptions options)
    : impl_(std::make_unique<Impl>()) {
  require(options.page_size >= 1, ErrorKind::Validation, "fixture page size must be at least 1");
  impl_->options = std::move(options);
  impl_->items.reserve(records.size() + impl_->options.raw_records.size());
  for (const auto& r : records) impl_->items.push_back(encode_record(r).dump());
  for (const auto& raw : impl_->options.raw_records) impl_->items.push_back(raw);

  auto& srv = impl_->server;
  Impl* self = impl_.get();
  // Logged before the handler runs so a client never sees a response whose
  // request is not yet in the log.
  srv.set_pre_routing_handler([self](const httplib::Request& req, httplib::Response&) {
    std::lock_guard lock(self->mu);
    self->log.push_back(req.method + " " + req.path);
    return httplib::Server::HandlerResponse::Unhandled;
  });
  srv.Get("/api/v1/submolts", [self](const httplib::Request& req, httplib::Response& res) { self->handle_list(req, res); });
  srv.Get("/__fixture/log", [self](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(self->mu);
    res.set_content(json(self->log).dump(), "application/json");
  });
  srv.Get("/__fixture/shutdown", [self](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"ok":true})", "application/json");
    std::thread([self] { self->server.stop(); }).detach();
  });
  const auto not_allowed = [](const httplib::Request&, httplib::Response& res) {
    res.status = 405;
    res.set_header("Allow", "GET");
    res.set_content(R"({"error":"read-only service"})", "application/json");
  };
  srv.Post(".*", not_allowed);
  srv.Put(".*", not_allowed);
  srv.Patch(".*", not_allowed);
  srv.Delete(".*", not_allowed);

  const auto& host = impl_->options.host;
  if (impl_->options.port == 0) {
    impl_->port = srv.bind_to_any_port(host);
  } else {
    impl_->port = srv.bind_to_port(host, impl_->options.port) ? impl_->options.port : -1;
  }
  require(impl_->port > 0, ErrorKind::Io,
          "fixture server could not bind " + host + ":" + std::to_string(impl_->options.port));
  impl_->thread = std::thread([self] { self->server.listen_after_bind(); });
  srv.wait_until_ready();
  log().info("fixture server listening on {}", base_url());
}

FixtureServer::~FixtureServer() {
  stop();
  wait();
}

int FixtureServer::port() const { return impl_->port; }

std::string FixtureServer::base_url() const {
  return "http://" + impl_->options.host + ":" + std::to_string(impl_->port);
}

std::vector<std::string> FixtureServer::request_log() const {
  std::lock_guard lock(impl_->mu);
  return impl_->log;
}

void FixtureServer::stop() { impl_->server.stop(); }

void FixtureServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace silico
