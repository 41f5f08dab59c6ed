#include <gtest/gtest.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "silico/pipeline.hpp"
#include "silico/synthetic.hpp"
#include "silico/util.hpp"
#include "support/test_support.hpp"

using namespace silico;
using nlohmann::json;

namespace {

// A small replayable corpus so stages run without a server.
RunConfig small_run(const testsupport::TempDir& dir) {
  const auto corpus = generate_corpus(builtin_spec("eight-themes"));
  write_corpus(corpus, dir / "fixture");
  RunConfig cfg;
  cfg.out_dir = dir / "run";
  cfg.snapshot = dir / "fixture" / "corpus.snapshot.jsonl";
  cfg.dim = 128;
  cfg.k_max = 10;
  cfg.restarts = 3;
  cfg.tsne_iterations = 300;
  return cfg;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST(Config, SetGetAndUnknownKeys) {
  RunConfig cfg;
  cfg.set("cluster.k_max", "12");
  EXPECT_EQ(cfg.k_max, 12u);
  EXPECT_EQ(cfg.get("cluster.k_max"), "12");
  EXPECT_EQ(kind_of([&] { cfg.set("cluster.nope", "1"); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([&] { cfg.set("cluster.k_max", "-3"); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([&] { cfg.set("force", "maybe"); }), ErrorKind::Validation);
  for (const auto& key : RunConfig::keys()) EXPECT_NO_THROW(cfg.get(key)) << key;
}

TEST(Config, FileNestedAndDotted) {
  testsupport::TempDir dir;
  write_file_atomic(dir / "c.json", R"({
    // comments are allowed
    "seed": 9,
    "cluster": {"k_min": 3, "normalize": true},
    "embed.dim": 64,
    "crawl": {"base_url": "http://example.test"}
  })");
  RunConfig cfg;
  cfg.load_file(dir / "c.json");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.k_min, 3u);
  EXPECT_TRUE(cfg.normalize);
  EXPECT_EQ(cfg.dim, 64u);
  EXPECT_EQ(cfg.base_url, "http://example.test");
  write_file_atomic(dir / "bad.json", R"({"cluster": {"k_min": [1]}})");
  EXPECT_THROW(cfg.load_file(dir / "bad.json"), Error);
}

TEST(Config, EnvironmentIsLowestPrecedence) {
  ::setenv("SILICO_SEED", "77", 1);
  RunConfig cfg;
  cfg.load_env();
  EXPECT_EQ(cfg.seed, 77u);
  cfg.set("seed", "5");
  EXPECT_EQ(cfg.seed, 5u);
  ::unsetenv("SILICO_SEED");
}

TEST(Config, Validation) {
  RunConfig cfg;
  cfg.k_min = 5;
  cfg.k_max = 4;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Validation);
  RunConfig missing;
  missing.snapshot = "/nonexistent/snap.jsonl";
  EXPECT_EQ(kind_of([&] { missing.validate(); }), ErrorKind::MissingInput);
}

TEST(Stages, MissingInputsAreExitCodeTwo) {
  testsupport::TempDir dir;
  RunConfig cfg;
  cfg.out_dir = dir / "run";
  EXPECT_EQ(kind_of([&] { run_stage(cfg, "cluster"); }), ErrorKind::MissingInput);
  EXPECT_EQ(kind_of([&] { run_stage(cfg, "preprocess"); }), ErrorKind::MissingInput);
  EXPECT_EQ(kind_of([&] { run_stage(cfg, "bogus"); }), ErrorKind::Usage);
}

TEST(Stages, PaperShapedPreprocessAudit) {
  testsupport::TempDir dir;
  write_corpus(generate_corpus(builtin_spec("paper-shape")), dir / "fixture");
  RunConfig cfg;
  cfg.out_dir = dir / "run";
  cfg.snapshot = dir / "fixture" / "corpus.snapshot.jsonl";
  run_stage(cfg, "crawl");
  run_stage(cfg, "preprocess");
  const auto audit = json::parse(read_file(dir / "run/preprocess/audit.json"));
  EXPECT_EQ(audit["pruned_sparse"], 279);
  EXPECT_EQ(audit["pruned_template"], 8317);
  EXPECT_EQ(audit["output"], 4162);
  const auto record = json::parse(read_file(dir / "run/preprocess/stage.json"));
  EXPECT_EQ(record["schema"], "stage/1");
  EXPECT_EQ(record["inputs"][0]["path"], "crawl/snapshot.jsonl");
  EXPECT_EQ(record["inputs"][0]["sha256"], sha256_file_hex(dir / "run/crawl/snapshot.jsonl"));
}

TEST(Stages, FullRunCachingAndDeterminism) {
  testsupport::TempDir dir;
  auto cfg = small_run(dir);
  const auto outcomes = run_pipeline(cfg);
  ASSERT_EQ(outcomes.size(), stage_names().size());
  for (const auto& o : outcomes) EXPECT_FALSE(o.cached) << o.stage;

  const auto report = json::parse(read_file(dir / "run/review/final_report.json"));
  EXPECT_EQ(report["findings"].size(), json::parse(read_file(dir / "run/cluster/model.json"))["k"].get<std::size_t>());
  EXPECT_TRUE(std::filesystem::exists(dir / "run/report/report.md"));

  // Same parameters: every stage is reused.
  for (const auto& o : run_pipeline(cfg)) EXPECT_TRUE(o.cached) << o.stage;

  // Changing a cluster parameter reruns cluster; upstream stages are reused.
  // Later stages rerun only if the cluster outputs actually changed.
  const auto assignments = read_file(dir / "run/cluster/assignments.tsv");
  cfg.restarts = 4;
  for (const auto& o : run_pipeline(cfg)) {
    if (o.stage == "crawl" || o.stage == "preprocess" || o.stage == "embed") EXPECT_TRUE(o.cached) << o.stage;
    if (o.stage == "cluster") EXPECT_FALSE(o.cached);
  }

  // Forced rerun with the original seed reproduces the assignments.
  cfg.restarts = 3;
  cfg.force = true;
  run_stage(cfg, "cluster");
  EXPECT_EQ(read_file(dir / "run/cluster/assignments.tsv"), assignments);
}

TEST(Stages, ReviewEditsFlowIntoReport) {
  testsupport::TempDir dir;
  auto cfg = small_run(dir);
  cfg.k_fixed = 8;
  run_pipeline(cfg);
  write_file_atomic(dir / "edits.jsonl",
                    R"({"cluster": 6, "field": "categories", "value": "Noise", "reviewer": "r", "rationale": "meta"})"
                    "\n");
  cfg.edits = dir / "edits.jsonl";
  run_stage(cfg, "review");
  run_stage(cfg, "report");
  const auto report = json::parse(read_file(dir / "run/report/report.json"));
  EXPECT_EQ(report["findings"][6]["categories"], json::array({"Noise"}));
  EXPECT_NE(read_file(dir / "run/report/report.md").find("| 6 |"), std::string::npos);
}
