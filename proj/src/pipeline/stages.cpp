#include <cstdlib>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "silico/acquisition.hpp"
#include "silico/clustering.hpp"
#include "silico/embedding.hpp"
#include "silico/error.hpp"
#include "silico/log.hpp"
#include "silico/ngram.hpp"
#include "silico/pipeline.hpp"
#include "silico/preprocessing.hpp"
#include "silico/projection.hpp"
#include "silico/thematic.hpp"
#include "silico/util.hpp"
#include "silico/wordcloud.hpp"

namespace silico {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string env_or_empty(const std::string& name) {
  if (name.empty()) return {};
  const char* v = std::getenv(name.c_str());
  return v ? v : "";
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// Tracks one stage execution: declared inputs and parameters form a digest
// that decides whether earlier outputs can be reused.
class StageRun {
 public:
  StageRun(const RunConfig& cfg, std::string name)
      : cfg_(cfg), name_(std::move(name)), dir_(cfg.stage_dir(name_)), started_at_(utc_now_iso8601()) {
    stage_seed_ = derive_seed(cfg.seed, name_);
  }

  std::uint64_t seed() const { return stage_seed_; }
  const fs::path& dir() const { return dir_; }

  const fs::path& input(const fs::path& path, std::string_view producer = {}) {
    if (!fs::exists(path)) {
      fail(ErrorKind::MissingInput,
           producer.empty() ? "missing input " + path.string()
                            : "stage " + name_ + " needs " + path.string() + "; run '" + std::string(producer) +
                                  "' first");
    }
    inputs_.push_back({display(path), sha256_file_hex(path)});
    paths_.push_back(path);
    return paths_.back();
  }

  void param(const std::string& key, json value) { params_[key] = std::move(value); }

  bool cached() {
    digest_ = compute_digest();
    if (cfg_.force) return false;
    const auto record = dir_ / "stage.json";
    if (!fs::exists(record)) return false;
    try {
      const auto prev = json::parse(read_file(record));
      if (prev.value("digest", "") != digest_) return false;
      for (const auto& out : prev.at("outputs")) {
        const fs::path p = dir_ / out.at("path").get<std::string>();
        if (!fs::exists(p) || sha256_file_hex(p) != out.at("sha256").get<std::string>()) return false;
      }
    } catch (const std::exception&) {
      return false;
    }
    log().info("{}: inputs and parameters unchanged, reusing outputs", name_);
    return true;
  }

  fs::path output(const std::string& file) {
    outputs_.push_back(file);
    return dir_ / file;
  }

  void extra(const std::string& key, json value) { extra_[key] = std::move(value); }

  StageOutcome finish() {
    json outs = json::array();
    for (const auto& f : outputs_) outs.push_back({{"path", f}, {"sha256", sha256_file_hex(dir_ / f)}});
    json ins = json::array();
    for (const auto& [p, d] : inputs_) ins.push_back({{"path", p}, {"sha256", d}});
    json record = {{"schema", "stage/1"},
                   {"stage", name_},
                   {"tool_version", kToolVersion},
                   {"master_seed", cfg_.seed},
                   {"stage_seed", stage_seed_},
                   {"params", params_},
                   {"inputs", ins},
                   {"outputs", outs},
                   {"digest", digest_},
                   {"started_at", started_at_},
                   {"finished_at", utc_now_iso8601()}};
    for (const auto& [k, v] : extra_.items()) record[k] = v;
    write_json(dir_ / "stage.json", record);
    return {name_, false, dir_};
  }

  StageOutcome reused() const { return {name_, true, dir_}; }

 private:
  std::string display(const fs::path& p) const {
    const auto rel = p.lexically_relative(cfg_.out_dir);
    return !rel.empty() && *rel.begin() != ".." ? rel.generic_string() : p.generic_string();
  }

  std::string compute_digest() const {
    std::string material = name_ + "\n" + std::string(kToolVersion) + "\n" + std::to_string(cfg_.seed) + "\n" +
                           params_.dump() + "\n";
    for (const auto& [p, d] : inputs_) material += p + " " + d + "\n";
    return sha256_hex(material);
  }

  const RunConfig& cfg_;
  std::string name_;
  fs::path dir_;
  std::string started_at_;
  std::uint64_t stage_seed_ = 0;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<fs::path> paths_;
  std::vector<std::string> outputs_;
  json params_ = json::object();
  json extra_ = json::object();
  std::string digest_;
};

fs::path snapshot_file(const RunConfig& c) { return c.stage_dir("crawl") / "snapshot.jsonl"; }
fs::path refined_file(const RunConfig& c) { return c.stage_dir("preprocess") / "refined.jsonl"; }
fs::path audit_file(const RunConfig& c) { return c.stage_dir("preprocess") / "audit.json"; }
fs::path matrix_file(const RunConfig& c) { return c.stage_dir("embed") / "embeddings.bin"; }
fs::path model_file(const RunConfig& c) { return c.stage_dir("cluster") / "model.json"; }
fs::path centroid_file(const RunConfig& c) { return c.stage_dir("cluster") / "centroids.bin"; }
fs::path elbow_file(const RunConfig& c) { return c.stage_dir("cluster") / "elbow.json"; }
fs::path ngram_index_file(const RunConfig& c) { return c.stage_dir("ngrams") / "index.json"; }
fs::path layout_file(const RunConfig& c) { return c.stage_dir("render") / "layout.json"; }
fs::path grid_svg_file(const RunConfig& c) { return c.stage_dir("render") / "wordclouds.svg"; }
fs::path grid_png_file(const RunConfig& c) { return c.stage_dir("render") / "wordclouds.png"; }
fs::path raw_report_file(const RunConfig& c) { return c.stage_dir("discover") / "raw_report.json"; }
fs::path final_report_file(const RunConfig& c) { return c.stage_dir("review") / "final_report.json"; }

StageOutcome stage_crawl(const RunConfig& cfg) {
  StageRun run(cfg, "crawl");
  const bool replay = !cfg.snapshot.empty();
  if (replay) {
    run.param("mode", "replay");
    run.input(cfg.snapshot);
  } else {
    require(!cfg.base_url.empty(), ErrorKind::Validation,
            "no base URL configured; set crawl.base_url, SILICO_BASE_URL or crawl.snapshot");
    run.param("mode", "live");
    run.param("base_url", cfg.base_url);
    run.param("path", cfg.crawl_path);
    run.param("pagination", cfg.pagination);
    run.param("page_size", cfg.page_size);
  }
  if (run.cached()) return run.reused();

  const auto out = run.output("snapshot.jsonl");
  CorpusSnapshot snap;
  if (replay) {
    snap = load_snapshot(cfg.snapshot);
  } else {
    ClientConfig client;
    client.base_url = cfg.base_url;
    client.path = cfg.crawl_path;
    client.pagination = parse_pagination(cfg.pagination);
    client.page_size = cfg.page_size;
    client.requests_per_second = cfg.requests_per_second;
    client.retry.max_retries = static_cast<int>(cfg.crawl_retries);
    client.api_key = env_or_empty(cfg.api_key_env);
    try {
      snap = crawl_all(client);
    } catch (const CrawlInterrupted& e) {
      const auto partial = incomplete_path_for(out);
      save_snapshot(e.partial(), partial);
      fail(ErrorKind::Provider, std::string(e.what()) + "; partial snapshot (" +
                                    std::to_string(e.partial().records.size()) + " records) kept at " +
                                    partial.string());
    }
  }
  save_snapshot(snap, out);
  run.extra("summary", {{"snapshot_id", snap.snapshot_id},
                        {"records", snap.records.size()},
                        {"pages_fetched", snap.pages_fetched},
                        {"malformed", snap.malformed},
                        {"collisions", snap.collisions}});
  return run.finish();
}

StageOutcome stage_preprocess(const RunConfig& cfg) {
  StageRun run(cfg, "preprocess");
  run.input(snapshot_file(cfg), "crawl");
  run.param("threshold", cfg.threshold);
  run.param("normalization_version", kNormalizationVersion);
  if (run.cached()) return run.reused();

  const auto snap = load_snapshot(snapshot_file(cfg));
  require(snap.complete, ErrorKind::Validation, "snapshot is marked incomplete; re-crawl before preprocessing");
  const auto refined = refine(snap, cfg.threshold);
  save_refined(refined, run.output("refined.jsonl"), run.output("audit.json"));
  log().info("preprocess: {} in, {} sparse, {} template, {} kept", refined.input_count, refined.pruned_sparse,
             refined.pruned_template, refined.records.size());
  return run.finish();
}

StageOutcome stage_embed(const RunConfig& cfg) {
  StageRun run(cfg, "embed");
  run.input(refined_file(cfg), "preprocess");
  run.input(audit_file(cfg), "preprocess");

  ProviderConfig provider;
  provider.kind = parse_provider_kind(cfg.embed_provider);
  provider.endpoint = cfg.embed_endpoint;
  provider.model = cfg.embed_model;
  provider.dim = cfg.dim;
  provider.batch_size = cfg.embed_batch;
  provider.max_in_flight = cfg.embed_in_flight;
  provider.cache_dir = cfg.cache_dir.empty() ? cfg.out_dir / "cache" / "embeddings" : cfg.cache_dir;
  provider.seed = run.seed();
  provider.api_key = env_or_empty(cfg.embed_key_env);
  run.param("provider_tag", provider.provider_tag());
  if (run.cached()) return run.reused();

  const auto corpus = load_refined(refined_file(cfg), audit_file(cfg));
  EmbedStats stats;
  const auto matrix = embed_corpus(corpus, provider, &stats);
  const auto out = run.output("embeddings.bin");
  save_matrix(matrix, out);
  run.output(ids_sidecar_path(out).filename().string());
  log().info("embed: {} rows, {} cache hits, {} computed, {} remote calls", matrix.rows(), stats.cache_hits,
             stats.computed, stats.remote_calls);
  run.extra("stats",
            {{"cache_hits", stats.cache_hits}, {"computed", stats.computed}, {"remote_calls", stats.remote_calls}});
  return run.finish();
}

StageOutcome stage_cluster(const RunConfig& cfg) {
  StageRun run(cfg, "cluster");
  run.input(matrix_file(cfg), "embed");
  run.input(ids_sidecar_path(matrix_file(cfg)), "embed");
  run.param("k_min", cfg.k_min);
  run.param("k_max", cfg.k_max);
  run.param("k", cfg.k_fixed);
  run.param("restarts", cfg.restarts);
  run.param("max_iter", cfg.max_iter);
  run.param("tol", cfg.tol);
  run.param("normalize", cfg.normalize);
  if (run.cached()) return run.reused();

  const auto matrix = load_matrix(matrix_file(cfg));
  KMeansOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  opts.normalize_input = cfg.normalize;
  ClusterModel model;
  json elbow;
  if (cfg.k_fixed > 0) {
    require(cfg.k_fixed <= matrix.rows(), ErrorKind::Validation, "cluster.k exceeds the number of records");
    model = kmeans_best_of(matrix, cfg.k_fixed, cfg.restarts, run.seed(), opts);
    elbow = {{"fixed", true}, {"selected_k", cfg.k_fixed}, {"points", json::array()}};
  } else {
    const std::size_t k_max = std::min(cfg.k_max, matrix.rows());
    require(cfg.k_min < k_max, ErrorKind::Validation,
            fmt::format("elbow range [{}, {}] is empty for {} records", cfg.k_min, k_max, matrix.rows()));
    std::vector<ClusterModel> models;
    const auto curve = elbow_select(matrix, cfg.k_min, k_max, cfg.restarts, run.seed(), opts, &models);
    model = std::move(models[curve.selected_k - cfg.k_min]);
    json points = json::array();
    for (const auto& p : curve.points) {
      points.push_back({{"k", p.k}, {"wcss", p.wcss}, {"chord_distance", p.chord_distance}});
    }
    elbow = {{"fixed", false},
             {"selected_k", curve.selected_k},
             {"confidence", curve.confidence},
             {"low_confidence", curve.low_confidence},
             {"restarts", curve.restarts},
             {"seed", curve.seed},
             {"points", points}};
    if (curve.low_confidence) {
      log().warn("elbow is weak (chord distance {:.4f}); selected K={} may not be meaningful", curve.confidence,
                 curve.selected_k);
    }
  }
  save_model(model, run.output("model.json"), run.output("centroids.bin"));
  write_json(run.output("elbow.json"), elbow);
  std::string tsv;
  for (std::size_t i = 0; i < model.record_ids.size(); ++i) {
    tsv += model.record_ids[i] + "\t" + std::to_string(model.assignments[i]) + "\n";
  }
  write_file_atomic(run.output("assignments.tsv"), tsv);
  log().info("cluster: K={}, WCSS={:.6g}", model.k, model.wcss);
  return run.finish();
}

StageOutcome stage_project(const RunConfig& cfg) {
  StageRun run(cfg, "project");
  run.input(matrix_file(cfg), "embed");
  run.input(ids_sidecar_path(matrix_file(cfg)), "embed");
  run.input(model_file(cfg), "cluster");
  run.input(centroid_file(cfg), "cluster");
  run.input(audit_file(cfg), "preprocess");
  TsneOptions opts;
  opts.perplexity = cfg.perplexity;
  opts.iterations = cfg.tsne_iterations;
  opts.learning_rate = cfg.learning_rate;
  opts.early_exaggeration = cfg.exaggeration;
  opts.exaggeration_iters = cfg.exaggeration_iters;
  opts.theta = cfg.theta;
  opts.exact_threshold = cfg.exact_threshold;
  opts.pca_dims = cfg.pca_dims;
  run.param("perplexity", opts.perplexity);
  run.param("iterations", opts.iterations);
  run.param("learning_rate", opts.learning_rate);
  run.param("exaggeration", opts.early_exaggeration);
  run.param("exaggeration_iters", opts.exaggeration_iters);
  run.param("theta", opts.theta);
  run.param("exact_threshold", opts.exact_threshold);
  run.param("pca_dims", opts.pca_dims);
  if (run.cached()) return run.reused();

  const auto matrix = load_matrix(matrix_file(cfg));
  const auto model = load_model(model_file(cfg), centroid_file(cfg));
  const auto snapshot_id = read_json(audit_file(cfg)).value("source_snapshot_id", "");
  const auto proj = tsne(matrix, run.seed(), opts);
  save_projection(proj, run.output("projection.bin"));
  run.output("projection.bin.meta.json");
  scatter_svg(proj, model, snapshot_id, run.output("scatter.svg"));
  log().info("project: KL {:.4f} after exaggeration, {:.4f} final", proj.kl_after_exaggeration, proj.final_kl);
  return run.finish();
}

StageOutcome stage_ngrams(const RunConfig& cfg) {
  StageRun run(cfg, "ngrams");
  run.input(refined_file(cfg), "preprocess");
  run.input(audit_file(cfg), "preprocess");
  run.input(model_file(cfg), "cluster");
  run.input(centroid_file(cfg), "cluster");
  run.param("n_min", cfg.n_min);
  run.param("n_max", cfg.n_max);
  run.param("tokenizer_version", kTokenizerVersion);
  if (run.cached()) return run.reused();

  const auto corpus = load_refined(refined_file(cfg), audit_file(cfg));
  const auto model = load_model(model_file(cfg), centroid_file(cfg));
  json files = json::array();
  for (std::size_t c = 0; c < model.k; ++c) {
    const auto profile = profile_cluster(corpus, model, c, cfg.n_min, cfg.n_max);
    const auto name = fmt::format("profile-{}.json", c);
    save_profile(profile, run.output(name));
    files.push_back(name);
  }
  write_json(run.output("index.json"), {{"k", model.k},
                                        {"n_min", cfg.n_min},
                                        {"n_max", cfg.n_max},
                                        {"tokenizer_version", kTokenizerVersion},
                                        {"profiles", files}});
  return run.finish();
}

StageOutcome stage_render(const RunConfig& cfg) {
  StageRun run(cfg, "render");
  const auto index = read_json(run.input(ngram_index_file(cfg), "ngrams"));
  const auto k = index.at("k").get<std::size_t>();
  std::vector<fs::path> profile_paths;
  for (const auto& f : index.at("profiles")) {
    profile_paths.push_back(run.input(cfg.stage_dir("ngrams") / f.get<std::string>(), "ngrams"));
  }
  run.param("width", cfg.canvas_width);
  run.param("height", cfg.canvas_height);
  run.param("max_phrases", cfg.max_phrases);
  run.param("font_min", cfg.font_min);
  run.param("font_max", cfg.font_max);
  run.param("png_width", cfg.png_width);
  if (run.cached()) return run.reused();

  require(profile_paths.size() == k, ErrorKind::Validation, "n-gram index lists the wrong number of profiles");
  const LayoutOptions opts{cfg.max_phrases, cfg.font_min, cfg.font_max};
  const Canvas canvas{cfg.canvas_width, cfg.canvas_height};
  std::vector<WordCloudPanel> panels;
  json layout_panels = json::array();
  for (std::size_t c = 0; c < k; ++c) {
    const auto profile = load_profile(profile_paths[c]);
    require(profile.cluster_index == c, ErrorKind::Validation, "n-gram profiles are out of cluster order");
    auto panel = layout_panel(profile, canvas, derive_seed(run.seed(), "panel-" + std::to_string(c)), opts);
    json placements = json::array();
    for (const auto& p : panel.placements) {
      placements.push_back(
          {{"phrase", p.phrase}, {"count", p.count}, {"font_size", p.font_size}, {"x", p.x}, {"y", p.y}});
    }
    layout_panels.push_back(
        {{"cluster", c}, {"seed", panel.seed}, {"dropped", panel.dropped}, {"placements", placements}});
    panels.push_back(std::move(panel));
  }
  std::optional<int> png;
  if (cfg.png_width > 0) png = static_cast<int>(cfg.png_width);
  const auto set = compose_grid(std::move(panels), k, run.output("wordclouds.svg"), png);
  if (set.png_path) run.output(set.png_path->filename().string());
  write_json(run.output("layout.json"),
             {{"k", k}, {"rows", set.rows}, {"cols", set.cols}, {"png", set.png_path.has_value()}, {"panels", layout_panels}});
  return run.finish();
}

StageOutcome stage_discover(const RunConfig& cfg) {
  StageRun run(cfg, "discover");
  const auto layout = read_json(run.input(layout_file(cfg), "render"));
  run.input(grid_svg_file(cfg), "render");
  const bool has_png = layout.value("png", false);
  if (has_png) run.input(grid_png_file(cfg), "render");
  const auto k = layout.at("k").get<std::size_t>();

  VlmConfig vlm;
  vlm.kind = parse_vlm_kind(cfg.vlm_provider);
  vlm.endpoint = cfg.vlm_endpoint;
  vlm.model = cfg.vlm_model;
  vlm.profile = cfg.vlm_profile;
  vlm.canned_response = cfg.vlm_response;
  vlm.api_key = env_or_empty(cfg.vlm_key_env);
  if (vlm.kind == VlmConfig::Kind::Canned) run.input(cfg.vlm_response);
  auto provider = make_provider(vlm);
  run.param("provider_tag", provider->tag());
  run.param("prompt_version", default_prompt_template().version);
  if (run.cached()) return run.reused();

  const auto prompt = assemble_prompt(k);
  write_file_atomic(run.output("prompt.txt"), prompt);
  VisualFeatureSet image;
  image.rows = layout.at("rows").get<std::size_t>();
  image.cols = layout.at("cols").get<std::size_t>();
  image.svg_path = grid_svg_file(cfg);
  if (has_png) image.png_path = grid_png_file(cfg);
  const auto report = discover(image, prompt, k, *provider, run.dir());
  write_file_atomic(run.output("response.txt"), report.response_text);
  write_json(run.output("raw_report.json"), raw_report_json(report));
  std::size_t flagged = 0;
  for (const auto& f : report.findings) flagged += f.flagged ? 1 : 0;
  if (flagged) log().warn("discover: {} findings carry category labels outside the vocabulary", flagged);
  return run.finish();
}

StageOutcome stage_review(const RunConfig& cfg) {
  StageRun run(cfg, "review");
  run.input(raw_report_file(cfg), "discover");
  if (!cfg.edits.empty()) run.input(cfg.edits);
  run.param("approver", cfg.approver);
  if (run.cached()) return run.reused();

  const auto raw = raw_report_from_json(read_json(raw_report_file(cfg)));
  const auto edits = cfg.edits.empty() ? std::vector<ReviewEdit>{} : load_edits(cfg.edits);
  const auto final_report = apply_review(raw, edits, cfg.approver);
  write_json(run.output("final_report.json"), final_report_json(final_report));
  write_file_atomic(run.output("final_report.md"), render_markdown_table(final_report.findings));
  return run.finish();
}

StageOutcome stage_report(const RunConfig& cfg) {
  StageRun run(cfg, "report");
  const auto final_json = read_json(run.input(final_report_file(cfg), "review"));
  const auto audit = read_json(run.input(audit_file(cfg), "preprocess"));
  const auto elbow = read_json(run.input(elbow_file(cfg), "cluster"));
  run.input(model_file(cfg), "cluster");
  run.input(centroid_file(cfg), "cluster");
  if (run.cached()) return run.reused();

  const auto model = load_model(model_file(cfg), centroid_file(cfg));
  const auto sizes = model.cluster_sizes();
  // Decode the reviewed findings with the raw-report reader by swapping them into the base.
  json reviewed = final_json.at("base");
  reviewed["findings"] = final_json.at("findings");
  const auto findings = raw_report_from_json(reviewed).findings;

  std::string md = "# Thematic report\n\n";
  md += fmt::format("Snapshot `{}`, master seed {}, tool version {}.\n\n", audit.value("source_snapshot_id", ""), cfg.seed,
                    kToolVersion);
  md += "## Corpus refinement\n\n| Stage | Records |\n|---|---|\n";
  md += fmt::format("| Collected | {} |\n| Sparse removed | {} |\n| Template copies removed | {} |\n| Refined | {} |\n\n",
                    audit.value("input", 0), audit.value("pruned_sparse", 0), audit.value("pruned_template", 0),
                    audit.value("output", 0));
  md += "## Clustering\n\n";
  if (elbow.value("fixed", false)) {
    md += fmt::format("K = {} (fixed by configuration).\n\n", model.k);
  } else {
    md += fmt::format("K = {} selected by the elbow of WCSS over k = {}..{} (chord distance {:.4f}{}).\n\n", model.k,
                      elbow.at("points").front().at("k").get<std::size_t>(),
                      elbow.at("points").back().at("k").get<std::size_t>(), elbow.value("confidence", 0.0),
                      elbow.value("low_confidence", false) ? ", low confidence" : "");
  }
  md += "| Cluster | Members |\n|---|---|\n";
  for (std::size_t c = 0; c < sizes.size(); ++c) md += fmt::format("| {} | {} |\n", c, sizes[c]);
  md += "\n## Findings\n\n" + render_markdown_table(findings);
  md += fmt::format("\nApproved by {} at {}; {} review edits applied.\n", final_json.value("approved_by", ""),
                    final_json.value("approved_at", ""), final_json.at("edits").size());
  write_file_atomic(run.output("report.md"), md);

  json summary = {{"snapshot_id", audit.value("source_snapshot_id", "")},
                  {"master_seed", cfg.seed},
                  {"tool_version", kToolVersion},
                  {"refinement", audit},
                  {"k", model.k},
                  {"cluster_sizes", sizes},
                  {"findings", final_json.at("findings")}};
  write_json(run.output("report.json"), summary);
  return run.finish();
}

}  // namespace

StageOutcome run_stage(const RunConfig& config, const std::string& stage) {
  config.validate();
  static const std::map<std::string, StageOutcome (*)(const RunConfig&)> stages{
      {"crawl", stage_crawl},   {"preprocess", stage_preprocess}, {"embed", stage_embed},
      {"cluster", stage_cluster}, {"project", stage_project},     {"ngrams", stage_ngrams},
      {"render", stage_render}, {"discover", stage_discover},     {"review", stage_review},
      {"report", stage_report}};
  const auto it = stages.find(stage);
  require(it != stages.end(), ErrorKind::Usage, "unknown stage: " + stage);
  fs::create_directories(config.stage_dir(stage));
  return it->second(config);
}

std::vector<StageOutcome> run_pipeline(const RunConfig& config) {
  config.validate();
  std::vector<StageOutcome> out;
  for (const auto& name : stage_names()) out.push_back(run_stage(config, name));
  return out;
}

}  // namespace silico
