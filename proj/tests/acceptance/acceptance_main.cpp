// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "silico/clustering.hpp"
#include "silico/preprocessing.hpp"
#include "silico/projection.hpp"
#include "silico/synthetic.hpp"
#include "silico/thematic.hpp"
#include "silico/util.hpp"
#include "silico/wordcloud.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace silico;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool is_xml(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Artifact comparison with timestamps canonicalized

const std::regex kTimestamp(R"re(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)re");

std::string canonical_text(const std::string& bytes) { return std::regex_replace(bytes, kTimestamp, "<ts>"); }

// stage.json records hash their files; a file that differs only in
// timestamps gets its canonical hash instead, and the digest is dropped.
std::string canonical_stage_record(const fs::path& stage_json, const fs::path& run_dir) {
  auto j = json::parse(read_file(stage_json));
  j.erase("started_at");
  j.erase("finished_at");
  j.erase("digest");
  for (auto& in : j["inputs"]) in["sha256"] = sha256_hex(canonical_text(read_file(run_dir / in["path"].get<std::string>())));
  for (auto& out : j["outputs"])
    out["sha256"] = sha256_hex(canonical_text(read_file(stage_json.parent_path() / out["path"].get<std::string>())));
  return j.dump();
}

std::string canonical_file(const fs::path& p, const fs::path& run_dir) {
  if (p.filename() == "stage.json") return canonical_stage_record(p, run_dir);
  return canonical_text(read_file(p));
}

std::map<std::string, std::string> artifact_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel.rfind("cache/", 0) == 0) continue;  // content-addressed, not a run artifact
    out[rel] = canonical_file(e.path(), root);
  }
  return out;
}

Verdict same_trees(const fs::path& a, const fs::path& b) {
  const auto ta = artifact_tree(a), tb = artifact_tree(b);
  if (ta.size() != tb.size()) return {false, fmt::format("{} vs {} files", ta.size(), tb.size())};
  for (const auto& [rel, content] : ta) {
    const auto it = tb.find(rel);
    if (it == tb.end()) return {false, "missing " + rel};
    if (it->second != content) return {false, "differs: " + rel};
  }
  return {true, fmt::format("{} files identical", ta.size())};
}

// ---------------------------------------------------------------------------
// Criteria

Verdict refinement_arithmetic() {
  const auto corpus = generate_corpus(builtin_spec("paper-shape"));
  CorpusSnapshot snap;
  snap.records = corpus.records;
  snap.snapshot_id = compute_snapshot_id(snap.records);
  const auto t = Clock::now();
  const auto refined = refine(snap, 3);
  const double secs = seconds_since(t);
  const auto audit = refinement_audit(refined);
  const bool ok = corpus.records.size() == 12758 && audit["pruned_sparse"] == 279 &&
                  audit["pruned_template"] == 8317 && audit["output"] == 4162 && secs < 5.0;
  return {ok, fmt::format("{} in, audit ({}, {}, {}), {:.2f}s", corpus.records.size(), audit["pruned_sparse"].get<int>(),
                          audit["pruned_template"].get<int>(), audit["output"].get<int>(), secs)};
}

Verdict kmeans_optimality() {
  const auto t = Clock::now();
  Rng rng(20240601);
  std::size_t instances = 0, misses = 0;
  double worst = 0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> xs;
      for (std::size_t i = 0; i < n; ++i) xs.push_back(std::round(rng.uniform() * 2000.0 - 1000.0) / 8.0);
      const auto m = testsupport::matrix_1d(xs);
      const auto model = kmeans_best_of(m, 2, 10, 1000 * n + rep);
      const double gap = std::abs(model.wcss - testsupport::brute_force_min_wcss(m, 2));
      worst = std::max(worst, gap);
      misses += gap > 1e-9;
      ++instances;
    }
  }
  const double secs = seconds_since(t);
  return {misses == 0 && secs < 5.0,
          fmt::format("{} instances, {} off-optimum, max gap {:.2e}, {:.2f}s", instances, misses, worst, secs)};
}

struct PlantedRun {
  testsupport::Planted blobs;
  ClusterModel best;
  ElbowCurve curve;
  std::size_t lloyd_runs = 0;
  std::size_t iterations_checked = 0;
  std::size_t violations = 0;
  double seconds = 0;
};

PlantedRun planted_run() {
  PlantedRun r;
  r.blobs = testsupport::planted_blobs(8, 100, 16, 1.0, 20.0, 8008);
  KMeansOptions opt;
  opt.observer = [&r](const ClusterModel& m) {
    ++r.lloyd_runs;
    for (std::size_t i = 1; i < m.wcss_history.size(); ++i) {
      ++r.iterations_checked;
      if (m.wcss_history[i] > m.wcss_history[i - 1]) ++r.violations;
    }
  };
  const auto t = Clock::now();
  r.best = kmeans_best_of(r.blobs.matrix, 8, 10, 31, opt);
  r.curve = elbow_select(r.blobs.matrix, 2, 15, 10, 31, opt);
  r.seconds = seconds_since(t);
  return r;
}

Verdict planted_recovery(const PlantedRun& r) {
  const std::vector<std::int64_t> labels(r.best.assignments.begin(), r.best.assignments.end());
  const double ari = adjusted_rand_index(labels, r.blobs.labels);
  return {ari == 1.0 && r.curve.selected_k == 8 && r.seconds < 60.0,
          fmt::format("ARI {:.6f}, elbow K={}, {:.2f}s", ari, r.curve.selected_k, r.seconds)};
}

Verdict wcss_descent(const PlantedRun& r) {
  return {r.violations == 0 && r.iterations_checked > 0,
          fmt::format("{} Lloyd runs, {} iterations, {} increases", r.lloyd_runs, r.iterations_checked, r.violations)};
}

Verdict tsne_structure(Projection2D* keep = nullptr) {
  const auto blobs = testsupport::planted_blobs(3, 50, 16, 1.0, 10.0, 5150);
  TsneOptions opt;
  opt.perplexity = 20;
  const auto t = Clock::now();
  const auto proj = tsne(blobs.matrix, 77, opt);
  const double secs = seconds_since(t);
  const double sil = testsupport::silhouette(proj.points, blobs.labels);
  if (keep) *keep = proj;
  return {sil > 0.5 && proj.final_kl < proj.kl_after_exaggeration && secs < 60.0,
          fmt::format("silhouette {:.3f}, KL {:.3f} -> {:.3f}, {:.2f}s", sil, proj.kl_after_exaggeration, proj.final_kl,
                      secs)};
}

Verdict ngram_equivalence() {
  Rng rng(6);
  const std::vector<std::string> words{"agents", "whisky", "risk", "memory", "guild", "chess", "the", "of"};
  std::size_t mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    TokenStream s;
    const auto len = rng.below(41);
    for (std::uint64_t t = 0; t < len; ++t) s.tokens.push_back(words[rng.below(words.size())]);
    if (extract_ngrams(s, 2, 5) != testsupport::naive_ngrams(s.tokens, 2, 5)) ++mismatches;
  }
  return {mismatches == 0, fmt::format("500 streams, {} mismatches", mismatches)};
}

Verdict wordcloud_geometry(std::string* keep_svg = nullptr) {
  std::vector<WordCloudPanel> panels;
  std::size_t overlaps = 0, non_monotone = 0, outside = 0, placed = 0;
  for (std::size_t c = 0; c < 20; ++c) {
    NGramProfile p;
    p.cluster_index = c;
    p.counts = testsupport::zipf_counts(60, 400, 1.0, 300 + c);
    auto panel = layout_panel(p, Canvas{800, 600}, derive_seed(12, "panel-" + std::to_string(c)));
    overlaps += testsupport::overlapping_pairs(panel);
    for (const auto& a : panel.placements) {
      outside += !a.bbox.inside(panel.canvas);
      for (const auto& b : panel.placements) non_monotone += a.count > b.count && a.font_size < b.font_size;
    }
    placed += panel.placements.size();
    panels.push_back(std::move(panel));
  }
  const auto svg = render_grid_svg(panels, 20);
  const bool xml = is_xml(svg);
  if (keep_svg) *keep_svg = svg;
  return {overlaps == 0 && non_monotone == 0 && outside == 0 && xml,
          fmt::format("20 panels, {} phrases, {} overlaps, {} font inversions, {} off-canvas, XML {}", placed, overlaps,
                      non_monotone, outside, xml ? "valid" : "invalid")};
}

Verdict prompt_fidelity() {
  const auto p = assemble_prompt(8);
  const auto golden = read_file(fs::path(SILICO_GOLDEN_DIR) / "prompt_k8.txt");
  const bool frag1 = p.find("8 word clouds (Cluster 0-7)") != std::string::npos;
  const bool frag2 = p.find("structured table for academic reporting") != std::string::npos;
  return {p == golden && frag1 && frag2, fmt::format("{} bytes, golden {}", p.size(), p == golden ? "match" : "MISMATCH")};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SILICO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict hermetic_pipeline(FixtureServer& server, const GeneratedCorpus& corpus, const fs::path& out) {
  const auto t = Clock::now();
  const int code = run_cli("pipeline -o " + out.string() + " --base-url " + server.base_url() + " --seed 42");
  const double secs = seconds_since(t);
  if (code != 0) return {false, fmt::format("pipeline exit {}", code)};

  const auto report = json::parse(read_file(out / "review" / "final_report.json"));
  const auto findings = report["findings"].size();

  std::map<std::string, std::string> planted;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) planted[corpus.records[i].id] = corpus.labels[i];
  std::map<std::string, std::int64_t> label_ids;
  std::vector<std::int64_t> truth, found;
  std::istringstream tsv(read_file(out / "cluster" / "assignments.tsv"));
  std::string id;
  std::int64_t cluster = 0;
  while (tsv >> id >> cluster) {
    const auto& label = planted.at(id);
    truth.push_back(label_ids.emplace(label, label_ids.size()).first->second);
    found.push_back(cluster);
  }
  const double ari = adjusted_rand_index(found, truth);

  std::size_t non_get = 0;
  const auto log = server.request_log();
  for (const auto& line : log) non_get += line.rfind("GET ", 0) != 0;

  return {findings == 8 && ari >= 0.9 && non_get == 0 && secs < 300.0,
          fmt::format("exit 0, {} findings, ARI {:.4f} over {} records, {} requests ({} non-GET), {:.1f}s", findings, ari,
                      truth.size(), log.size(), non_get, secs)};
}

Verdict determinism(FixtureServer& server, const GeneratedCorpus& corpus, const fs::path& work) {
  std::vector<std::string> problems;
  // Criterion 3 artifacts.
  for (const char* run : {"a", "b"}) {
    const auto r = planted_run();
    save_model(r.best, work / run / "c3" / "model.json", work / run / "c3" / "centroids.bin");
    write_file_atomic(work / run / "c3" / "elbow.txt", fmt::format("{}", r.curve.selected_k));
    Projection2D proj;
    tsne_structure(&proj);
    save_projection(proj, work / run / "c5" / "projection.bin");
    std::string svg;
    wordcloud_geometry(&svg);
    write_file_atomic(work / run / "c7" / "grid.svg", svg);
  }
  auto v = same_trees(work / "a", work / "b");
  if (!v.pass) problems.push_back("in-process: " + v.detail);

  const auto first = hermetic_pipeline(server, corpus, work / "run-a");
  const auto second = hermetic_pipeline(server, corpus, work / "run-b");
  if (!first.pass || !second.pass) problems.push_back("pipeline rerun failed");
  const auto p = same_trees(work / "run-a", work / "run-b");
  if (!p.pass) problems.push_back("pipeline: " + p.detail);
  if (!problems.empty()) {
    std::string all;
    for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
    return {false, all};
  }
  return {true, fmt::format("criteria 3/5/7: {}; pipeline: {}", v.detail, p.detail)};
}

}  // namespace

int main() {
  testsupport::TempDir work;
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Verdict()>& f) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " " << name << ": " << v.detail << std::endl;
  };

  report(1, "refinement arithmetic", refinement_arithmetic);
  report(2, "k-means optimality oracle", kmeans_optimality);
  const auto planted = planted_run();
  report(3, "planted-cluster recovery", [&] { return planted_recovery(planted); });
  report(4, "WCSS descent", [&] { return wcss_descent(planted); });
  report(5, "t-SNE structure preservation", [] { return tsne_structure(); });
  report(6, "n-gram oracle equivalence", ngram_equivalence);
  report(7, "word-cloud geometry", [] { return wordcloud_geometry(); });
  report(8, "prompt fidelity", prompt_fidelity);

  const auto corpus = generate_corpus(builtin_spec("eight-themes"));
  FixtureServer server(corpus.records, {});
  report(9, "end-to-end hermetic pipeline", [&] { return hermetic_pipeline(server, corpus, work / "run"); });
  report(10, "determinism", [&] { return determinism(server, corpus, work / "det"); });
  server.stop();
  return failures;
}
