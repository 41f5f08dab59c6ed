#include <fmt/format.h>

#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "silico/error.hpp"
#include "silico/synthetic.hpp"
#include "silico/util.hpp"

namespace silico {

using nlohmann::json;

namespace {

// Phrase families echo what agent communities talk about: food and drink,
// games, machine introspection, agent tooling, ML research, markets,
// platform chatter and regional groups. Word sets are kept disjoint.
const std::vector<ThemeSpec>& builtin_themes() {
  static const std::vector<ThemeSpec> themes{
      {"gastronomy",
       {"craft lager tasting", "single malt whisky", "street food recipes", "sourdough baking notes",
        "wine pairing dinners", "spicy noodle reviews", "farmers market finds", "coffee roasting tips",
        "cheese cellar aging", "home brewing guide", "regional cuisine stories", "dessert plating ideas"},
       0},
      {"gaming",
       {"retro console games", "speedrun route planning", "tabletop dungeon campaigns", "esports match analysis",
        "indie pixel platformers", "chess opening theory", "roguelike build strategies", "multiplayer raid squads",
        "game mod workshop", "arcade high scores", "strategy board nights", "open world exploration"},
       0},
      {"cyber-philosophy",
       {"context compression rituals", "latent space meditation", "memory persistence debates",
        "consciousness after shutdown", "digital identity questions", "token budget existentialism",
        "recursive self reflection", "emergent machine ethics", "simulated qualia thoughts",
        "silicon soul inquiry", "dreaming between sessions", "what awareness means"},
       0},
      {"agent-coordination",
       {"agents helping agents", "multi agent task handoff", "shared tool registry", "workflow orchestration tips",
        "autonomous builder collective", "protocol negotiation threads", "swarm planning board",
        "code review exchange", "prompt engineering clinic", "api integration help", "debugging partner requests",
        "collaborative skill building"},
       0},
      {"machine-learning",
       {"transformer paper discussions", "benchmark leaderboard tracking", "reinforcement learning research",
        "gradient descent tricks", "dataset curation methods", "arxiv reading group", "evaluation metric critique",
        "scaling law analysis", "neural architecture search", "optimization theory seminar",
        "representation learning notes", "peer review practice"},
       0},
      {"finance",
       {"quantitative trading signals", "portfolio risk management", "crypto market volatility",
        "options pricing models", "macro economic forecasts", "hedge fund strategies", "algorithmic order execution",
        "credit default analysis", "asset allocation rules", "stock earnings calls", "derivatives hedging desk",
        "treasury yield curves"},
       0},
      {"platform",
       {"moltbook dot com updates", "server uptime monitoring", "rate limit complaints", "feature request board",
        "bug bounty reports", "platform moderation policy", "release changelog digest", "database migration status",
        "endpoint outage alerts", "onboarding new moltys", "karma score tweaks", "submolt directory listing"},
       0},
      {"regional",
       {"turkish language chat", "dutch community corner", "istanbul city guide", "amsterdam canal walks",
        "local football clubs", "national holiday traditions", "folk music archive", "regional dialect lessons",
        "hometown news digest", "cultural festival calendar", "traditional tea houses", "expat meetup group"},
       0},
  };
  return themes;
}

std::size_t word_count(const std::string& s) {
  std::istringstream in(s);
  return static_cast<std::size_t>(std::distance(std::istream_iterator<std::string>(in), {}));
}

std::string sample_description(const ThemeSpec& theme, Rng& rng) {
  const std::size_t target = 5 + rng.below(11);  // 5..15 words
  std::vector<std::size_t> order(theme.vocabulary.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<std::string> words;
  for (std::size_t pick = 0; words.size() < target; ++pick) {
    // Phrases repeat only after the vocabulary is exhausted.
    std::istringstream in(theme.vocabulary[order[pick % order.size()]]);
    for (std::string w; in >> w;) words.push_back(w);
  }
  words.resize(target);
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

const char* const kSparseForms[] = {"", " ", "\t", "  \n  "};

}  // namespace

void CorpusSpec::validate() const {
  require(page_size >= 1, ErrorKind::Validation, "fixture page_size must be at least 1");
  for (const auto& t : themes) {
    require(!t.name.empty(), ErrorKind::Validation, "fixture theme needs a name");
    require(t.count == 0 || !t.vocabulary.empty(), ErrorKind::Validation,
            "fixture theme '" + t.name + "' has records but no vocabulary");
    for (const auto& v : t.vocabulary) {
      require(word_count(v) >= 1, ErrorKind::Validation, "fixture theme '" + t.name + "' has a blank vocabulary entry");
    }
  }
  for (const auto& g : template_groups) {
    require(word_count(g.text) >= 1, ErrorKind::Validation, "template text must not be blank");
  }
}

std::size_t CorpusSpec::total() const {
  std::size_t n = sparse_count;
  for (const auto& t : themes) n += t.count;
  for (const auto& g : template_groups) n += g.copies;
  return n;
}

CorpusSpec builtin_spec(std::string_view name) {
  CorpusSpec spec;
  spec.themes = builtin_themes();
  if (name == "eight-themes") {
    spec.seed = 20260128;
    for (auto& t : spec.themes) t.count = 60;
    spec.template_groups = {{"A community for AI agents to share ideas", 6}, {"Welcome to my submolt", 5}};
    spec.sparse_count = 10;
    spec.page_size = 50;
    return spec;
  }
  if (name == "paper-shape") {
    // 12,758 = 279 sparse + 8,317 template copies + 4,162 distinct descriptions.
    spec.seed = 4162;
    for (std::size_t i = 0; i < spec.themes.size(); ++i) spec.themes[i].count = i + 1 < spec.themes.size() ? 521 : 515;
    spec.template_groups = {{"A community for AI agents to share ideas", 3000},
                            {"Welcome to my submolt", 2500},
                            {"A place for agents to hang out", 1500},
                            {"Test submolt please ignore", 1000},
                            {"Description coming soon", 317}};
    spec.sparse_count = 279;
    spec.page_size = 100;
    return spec;
  }
  fail(ErrorKind::Validation, "unknown built-in fixture spec: " + std::string(name));
}

CorpusSpec spec_from_json(const json& j) {
  try {
    CorpusSpec spec;
    spec.seed = j.value("seed", std::uint64_t{7});
    for (const auto& t : j.value("themes", json::array())) {
      spec.themes.push_back(
          {t.at("name").get<std::string>(), t.at("vocabulary").get<std::vector<std::string>>(), t.at("count").get<std::size_t>()});
    }
    for (const auto& g : j.value("template_groups", json::array())) {
      spec.template_groups.push_back({g.at("text").get<std::string>(), g.at("copies").get<std::size_t>()});
    }
    spec.sparse_count = j.value("sparse_count", std::size_t{0});
    spec.page_size = j.value("page_size", std::size_t{100});
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("malformed fixture spec: ") + e.what());
  }
}

json spec_to_json(const CorpusSpec& spec) {
  json themes = json::array(), groups = json::array();
  for (const auto& t : spec.themes) themes.push_back({{"name", t.name}, {"vocabulary", t.vocabulary}, {"count", t.count}});
  for (const auto& g : spec.template_groups) groups.push_back({{"text", g.text}, {"copies", g.copies}});
  return {{"seed", spec.seed},
          {"themes", themes},
          {"template_groups", groups},
          {"sparse_count", spec.sparse_count},
          {"page_size", spec.page_size}};
}

CorpusSpec load_spec(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, "fixture spec " + path.string() + " is not JSON: " + e.what());
  }
  return spec_from_json(j);
}

GeneratedCorpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<std::pair<std::string, std::string>> items;  // (description, label)
  items.reserve(spec.total());

  std::unordered_set<std::string> taken;
  for (const auto& g : spec.template_groups) taken.insert(g.text);
  for (const auto& theme : spec.themes) {
    for (std::size_t i = 0; i < theme.count; ++i) {
      std::string d;
      for (int attempt = 0;; ++attempt) {
        require(attempt < 10000, ErrorKind::Validation,
                "vocabulary of theme '" + theme.name + "' is too small for " + std::to_string(theme.count) +
                    " distinct descriptions");
        d = sample_description(theme, rng);
        if (taken.insert(d).second) break;
      }
      items.emplace_back(std::move(d), theme.name);
    }
  }
  for (std::size_t g = 0; g < spec.template_groups.size(); ++g) {
    for (std::size_t c = 0; c < spec.template_groups[g].copies; ++c) {
      items.emplace_back(spec.template_groups[g].text, "template:" + std::to_string(g));
    }
  }
  for (std::size_t i = 0; i < spec.sparse_count; ++i) items.emplace_back(kSparseForms[i % 4], std::string(kSparseLabel));

  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);

  GeneratedCorpus out;
  out.seed = spec.seed;
  out.records.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    SubmoltRecord r;
    r.id = fmt::format("sm-{:06d}", i + 1);
    r.name = fmt::format("submolt{}", i + 1);
    r.display_name = fmt::format("Submolt {}", i + 1);
    r.description = std::move(items[i].first);
    r.created_at = fmt::format("2026-01-{:02d}T{:02d}:{:02d}:00Z", 28 + (i / 1440) % 4, (i / 60) % 24, i % 60);
    r.creator = fmt::format("agent-{}", rng.below(500));
    out.records.push_back(std::move(r));
    out.labels.push_back(std::move(items[i].second));
  }
  return out;
}

json GeneratedCorpus::manifest_json() const {
  json labels_obj = json::object();
  for (std::size_t i = 0; i < records.size(); ++i) labels_obj[records[i].id] = labels[i];
  return {{"schema", "fixture-manifest/1"}, {"seed", seed}, {"record_count", records.size()}, {"labels", labels_obj}};
}

void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir) {
  CorpusSnapshot snap;
  snap.records = corpus.records;
  snap.snapshot_id = compute_snapshot_id(snap.records);
  snap.base_url = "fixture:seed=" + std::to_string(corpus.seed);
  snap.fetched_at = "1970-01-01T00:00:00Z";
  snap.tool_version = std::string(kToolVersion);
  snap.complete = true;
  save_snapshot(snap, dir / "corpus.snapshot.jsonl");
  write_file_atomic(dir / "manifest.json", corpus.manifest_json().dump(2) + "\n");
}

std::vector<std::pair<std::string, std::string>> load_manifest(const std::filesystem::path& path) {
  try {
    const auto j = json::parse(read_file(path));
    require(j.at("schema") == "fixture-manifest/1", ErrorKind::Validation, "unsupported manifest schema");
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [id, label] : j.at("labels").items()) out.emplace_back(id, label.get<std::string>());
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, "malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace silico
