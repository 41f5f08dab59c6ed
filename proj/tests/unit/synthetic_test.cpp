#include <gtest/gtest.h>

#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "silico/synthetic.hpp"
#include "silico/text.hpp"
#include "support/test_support.hpp"

using namespace silico;
using nlohmann::json;

namespace {

CorpusSpec eight_by_hundred() {
  auto spec = builtin_spec("eight-themes");
  for (auto& t : spec.themes) t.count = 100;
  spec.template_groups = {{"template one text", 5}, {"template two text", 5}};
  spec.sparse_count = 10;
  return spec;
}

}  // namespace

TEST(Generate, ArithmeticAndManifest) {
  const auto corpus = generate_corpus(eight_by_hundred());
  EXPECT_EQ(corpus.records.size(), 820u);
  const auto manifest = corpus.manifest_json();
  EXPECT_EQ(manifest["labels"].size(), 820u);
  std::set<std::string> ids;
  for (const auto& r : corpus.records) ids.insert(r.id);
  EXPECT_EQ(ids.size(), 820u);
}

TEST(Generate, ThemeDescriptionsUseVocabularyAndLength) {
  const auto spec = eight_by_hundred();
  const auto corpus = generate_corpus(spec);
  std::map<std::string, const ThemeSpec*> themes;
  for (const auto& t : spec.themes) themes[t.name] = &t;
  std::map<std::string, std::size_t> per_label;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& label = corpus.labels[i];
    per_label[label]++;
    const auto& desc = corpus.records[i].description;
    if (label == kSparseLabel) {
      EXPECT_TRUE(text::is_blank(desc));
    } else if (label.rfind("template:", 0) == 0) {
      const auto idx = std::stoul(label.substr(9));
      EXPECT_EQ(desc, spec.template_groups[idx].text);
    } else {
      const auto words = text::word_tokens(desc);
      EXPECT_GE(words.size(), 5u) << desc;
      EXPECT_LE(words.size(), 15u) << desc;
      // Every word comes from the theme vocabulary.
      std::set<std::string> vocab;
      for (const auto& phrase : themes.at(label)->vocabulary)
        for (const auto& w : text::word_tokens(phrase)) vocab.insert(w);
      for (const auto& w : words) EXPECT_TRUE(vocab.count(w)) << w << " in " << label;
    }
  }
  EXPECT_EQ(per_label["sparse"], 10u);
  EXPECT_EQ(per_label["template:0"], 5u);
  for (const auto& t : spec.themes) EXPECT_EQ(per_label[t.name], 100u);
}

TEST(Generate, SparseOnly) {
  CorpusSpec spec;
  spec.sparse_count = 3;
  const auto corpus = generate_corpus(spec);
  ASSERT_EQ(corpus.records.size(), 3u);
  for (const auto& r : corpus.records) EXPECT_TRUE(text::is_blank(r.description));
}

TEST(Generate, Deterministic) {
  const auto a = generate_corpus(eight_by_hundred());
  const auto b = generate_corpus(eight_by_hundred());
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.labels, b.labels);
  auto other = eight_by_hundred();
  other.seed += 1;
  EXPECT_NE(generate_corpus(other).records, a.records);
}

TEST(Generate, PaperShapeTotals) {
  const auto spec = builtin_spec("paper-shape");
  EXPECT_EQ(spec.total(), 12758u);
  EXPECT_EQ(spec.sparse_count, 279u);
  std::size_t copies = 0;
  for (const auto& g : spec.template_groups) {
    EXPECT_GT(g.copies, 3u);
    copies += g.copies;
  }
  EXPECT_EQ(copies, 8317u);
}

TEST(Spec, JsonRoundTripAndValidation) {
  const auto spec = eight_by_hundred();
  const auto back = spec_from_json(spec_to_json(spec));
  EXPECT_EQ(spec_to_json(back), spec_to_json(spec));
  auto bad = spec_to_json(spec);
  bad["themes"][0]["vocabulary"] = json::array();
  EXPECT_THROW(spec_from_json(bad), Error);
  EXPECT_THROW(builtin_spec("nope"), Error);
}

TEST(Spec, WriteCorpusAndManifest) {
  testsupport::TempDir dir;
  const auto corpus = generate_corpus(builtin_spec("eight-themes"));
  write_corpus(corpus, dir.path());
  const auto snap = load_snapshot(dir / "corpus.snapshot.jsonl");
  EXPECT_EQ(snap.records, corpus.records);
  const auto labels = load_manifest(dir / "manifest.json");
  EXPECT_EQ(labels.size(), corpus.records.size());
}

TEST(Server, PaginationAndBeyondLastPage) {
  std::vector<SubmoltRecord> records;
  for (int i = 0; i < 25; ++i) records.push_back({"id" + std::to_string(i), "n", {}, "d", {}, {}, {}});
  FixtureServer server(records, {});
  httplib::Client http(server.base_url());
  auto page = [&](const std::string& q) { return json::parse(http.Get("/api/v1/submolts?" + q)->body); };
  EXPECT_EQ(page("limit=10&page=1")["submolts"].size(), 10u);
  EXPECT_EQ(page("limit=10&page=2")["submolts"].size(), 10u);
  const auto last = page("limit=10&page=3");
  EXPECT_EQ(last["submolts"].size(), 5u);
  EXPECT_FALSE(last["has_more"].get<bool>());
  EXPECT_TRUE(last["next_cursor"].is_null());
  const auto beyond = page("limit=10&page=9");
  EXPECT_TRUE(beyond["submolts"].empty());
  EXPECT_TRUE(beyond["next_cursor"].is_null());
}

TEST(Server, RejectsWritesAndLogsEverything) {
  FixtureServer server({}, {});
  httplib::Client http(server.base_url());
  EXPECT_EQ(http.Post("/api/v1/submolts", "{}", "application/json")->status, 405);
  EXPECT_EQ(http.Get("/api/v1/submolts")->status, 200);
  const auto log = server.request_log();
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[0], "POST /api/v1/submolts");
  EXPECT_EQ(log[1].rfind("GET /api/v1/submolts", 0), 0u);
}

TEST(Server, ShutdownRouteStopsServer) {
  FixtureServer server({}, {});
  httplib::Client http(server.base_url());
  EXPECT_EQ(http.Get("/__fixture/shutdown")->status, 200);
  server.wait();
  SUCCEED();
}
