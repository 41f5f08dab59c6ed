#include <httplib.h>

#include <algorithm>
#include <regex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "silico/error.hpp"
#include "silico/log.hpp"
#include "silico/text.hpp"
#include "silico/thematic.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

namespace {

std::string xml_unescape(std::string s) {
  static const std::pair<std::string_view, std::string_view> entities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : entities) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
  }
  return s;
}

std::string title_case(const std::string& phrase) {
  std::string out = phrase;
  bool start = true;
  for (auto& c : out) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = c == ' ';
  }
  return out;
}

// Words that mark a phrase as being about agents themselves.
const std::set<std::string>& machine_lexicon() {
  static const std::set<std::string> words{
      "agent",     "agents",    "ai",         "llm",      "llms",      "latent",        "context",
      "protocol",  "protocols", "neural",     "autonomous", "bot",     "bots",          "machine",
      "compute",   "token",     "tokens",     "prompt",   "prompts",   "molt",          "moltbook",
      "moltys",    "orchestration", "consciousness", "silicon", "inference", "embedding", "embeddings",
      "gpu",       "api",       "qualia",     "shutdown", "swarm",     "openclaw"};
  return words;
}

class StubProvider final : public MultimodalProvider {
 public:
  std::string tag() const override { return "stub:svg-top-phrases/1"; }
  std::string complete(const std::string&, const VisualFeatureSet& image) override {
    return stub_response(read_file(image.svg_path));
  }
};

class CannedProvider final : public MultimodalProvider {
 public:
  explicit CannedProvider(std::filesystem::path path) : path_(std::move(path)) {}
  std::string tag() const override { return "canned:" + path_.filename().string(); }
  std::string complete(const std::string&, const VisualFeatureSet&) override { return read_file(path_); }

 private:
  std::filesystem::path path_;
};

class RemoteProvider final : public MultimodalProvider {
 public:
  explicit RemoteProvider(VlmConfig config) : config_(std::move(config)) {
    require(!config_.endpoint.empty(), ErrorKind::Validation, "multimodal endpoint is not configured");
    require(config_.profile == "openai-chat" || config_.profile == "simple", ErrorKind::Validation,
            "unknown multimodal provider profile: " + config_.profile);
  }

  std::string tag() const override { return "remote:" + config_.model + ":" + config_.profile; }

  std::string complete(const std::string& prompt, const VisualFeatureSet& image) override {
    const bool png = image.png_path.has_value();
    const std::string mime = png ? "image/png" : "image/svg+xml";
    const std::string payload = base64_encode(read_file(png ? *image.png_path : image.svg_path));

    json body;
    if (config_.profile == "openai-chat") {
      body = {{"model", config_.model},
              {"messages",
               json::array({{{"role", "user"},
                             {"content", json::array({{{"type", "text"}, {"text", prompt}},
                                                      {{"type", "image_url"},
                                                       {"image_url", {{"url", "data:" + mime + ";base64," + payload}}}}})}}})}};
    } else {
      body = {{"model", config_.model}, {"prompt", prompt}, {"image_base64", payload}, {"mime_type", mime}};
    }

    const auto scheme_end = config_.endpoint.find("://");
    require(scheme_end != std::string::npos, ErrorKind::Validation, "multimodal endpoint needs a scheme");
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    httplib::Client http(config_.endpoint.substr(0, path_start));
    http.set_read_timeout(std::chrono::seconds(300));
    const std::string path = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const std::string text = body.dump();

    auto delay = config_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      auto res = http.Post(path, headers, text, "application/json");
      std::string problem;
      if (!res) {
        problem = "transport error: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        try {
          const auto doc = json::parse(res->body);
          if (config_.profile == "openai-chat") return doc.at("choices").at(0).at("message").at("content").get<std::string>();
          return doc.at("text").get<std::string>();
        } catch (const json::exception& e) {
          fail(ErrorKind::Provider, std::string("unexpected multimodal response shape: ") + e.what());
        }
      } else if (res->status == 429 || res->status >= 500) {
        problem = "HTTP " + std::to_string(res->status);
      } else {
        fail(ErrorKind::Provider, "multimodal request failed with HTTP " + std::to_string(res->status));
      }
      if (attempt >= config_.max_retries) fail(ErrorKind::Provider, "multimodal provider failed after retries: " + problem);
      log().warn("multimodal call failed ({}); retrying", problem);
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }

 private:
  VlmConfig config_;
};

}  // namespace

VlmConfig::Kind parse_vlm_kind(std::string_view name) {
  if (name == "stub") return VlmConfig::Kind::Stub;
  if (name == "canned") return VlmConfig::Kind::Canned;
  if (name == "remote") return VlmConfig::Kind::Remote;
  fail(ErrorKind::Validation, "unknown multimodal provider: " + std::string(name));
}

std::unique_ptr<MultimodalProvider> make_provider(const VlmConfig& config) {
  switch (config.kind) {
    case VlmConfig::Kind::Stub: return std::make_unique<StubProvider>();
    case VlmConfig::Kind::Canned:
      require(!config.canned_response.empty(), ErrorKind::Validation, "canned provider needs a response file");
      return std::make_unique<CannedProvider>(config.canned_response);
    case VlmConfig::Kind::Remote: return std::make_unique<RemoteProvider>(config);
  }
  fail(ErrorKind::Internal, "unhandled provider kind");
}

// Largest phrases inspected per panel; two machine-flavored ones make the
// panel Silicon-Centric.
constexpr std::size_t kStubPhraseWindow = 10;

std::string stub_response(const std::string& svg) {
  static const std::regex panel_re(R"re(<g id="panel-(\d+)")re");
  static const std::regex phrase_re(R"re(<text class="phrase"[^>]*>([^<]*)</text>)re");

  std::vector<std::pair<std::size_t, std::vector<std::string>>> panels;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), panel_re); it != std::sregex_iterator(); ++it) {
    panels.push_back({std::stoul((*it)[1].str()), {}});
    const auto begin = svg.begin() + (*it).position(0);
    auto next = it;
    ++next;
    const auto end = next == std::sregex_iterator() ? svg.end() : svg.begin() + (*next).position(0);
    for (auto p = std::sregex_iterator(begin, end, phrase_re); p != std::sregex_iterator(); ++p) {
      panels.back().second.push_back(xml_unescape((*p)[1].str()));
    }
  }
  require(!panels.empty(), ErrorKind::Validation, "composed image has no word-cloud panels");

  std::string out =
      "| No. | Cluster | Theme | Sociological Insight | Category |\n"
      "|---|---|---|---|---|\n";
  for (const auto& [index, phrases] : panels) {
    std::string title = phrases.empty() ? "Sparse Cluster" : title_case(phrases.front());
    std::string theme = "No phrases above threshold";
    std::size_t machine_hits = 0;
    if (!phrases.empty()) {
      theme = "Dominant phrases: ";
      for (std::size_t i = 0; i < std::min<std::size_t>(3, phrases.size()); ++i) theme += (i ? "; " : "") + phrases[i];
    }
    for (std::size_t i = 0; i < std::min<std::size_t>(kStubPhraseWindow, phrases.size()); ++i) {
      for (const auto& w : text::word_tokens(phrases[i])) {
        if (machine_lexicon().count(w)) {
          ++machine_hits;
          break;
        }
      }
    }
    const bool machine = machine_hits >= 2;
    const std::string insight = machine ? "Agents organize this space around their own machine-native concerns."
                                        : "Agents reproduce a human social template in this space.";
    out += "| " + std::to_string(index) + " | " + title + " | " + theme + " | " + insight + " | " +
           std::string(category_display(machine ? Category::SiliconCentricity : Category::HumanMimicry)) + " |\n";
  }
  return out;
}

RawThematicReport discover(const VisualFeatureSet& image, const std::string& prompt, std::size_t k,
                           MultimodalProvider& provider, const std::filesystem::path& failure_dir,
                           const std::string& prompt_version) {
  RawThematicReport report;
  report.provider_tag = provider.tag();
  report.prompt_version = prompt_version;
  report.image_digest = sha256_file_hex(image.png_path ? *image.png_path : image.svg_path);
  report.response_text = provider.complete(prompt, image);
  try {
    report.findings = parse_report(report.response_text, k);
  } catch (const Error& e) {
    const auto kept = failure_dir / "response.unparsed.txt";
    write_file_atomic(kept, report.response_text);
    fail(ErrorKind::Validation, std::string(e.what()) + "; raw response kept at " + kept.string());
  }
  return report;
}

}  // namespace silico
