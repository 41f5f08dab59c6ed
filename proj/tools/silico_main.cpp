// Command-line front end. Talks to the toolkit only through the C API.

#include <csignal>
#include <cstdio>
#include <deque>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "silico/silico.h"

namespace {

struct StageFlag {
  const char* stage;
  const char* flag;
  const char* key;
  const char* help;
};

constexpr StageFlag kFlags[] = {
    {"crawl", "--base-url", "crawl.base_url", "Platform API base URL"},
    {"crawl", "--pagination", "crawl.pagination", "page-number or cursor"},
    {"crawl", "--page-size", "crawl.page_size", "Records requested per page"},
    {"crawl", "--rps", "crawl.requests_per_second", "Request rate ceiling"},
    {"crawl", "--max-retries", "crawl.max_retries", "Retries per page on 429/5xx"},
    {"crawl", "--snapshot", "crawl.snapshot", "Replay this snapshot file instead of crawling"},
    {"preprocess", "--threshold", "preprocess.threshold", "Template frequency threshold"},
    {"embed", "--provider", "embed.provider", "offline or remote"},
    {"embed", "--endpoint", "embed.endpoint", "Remote embedding endpoint URL"},
    {"embed", "--model", "embed.model", "Remote embedding model name"},
    {"embed", "--dim", "embed.dim", "Embedding dimension"},
    {"embed", "--batch-size", "embed.batch_size", "Texts per remote request"},
    {"embed", "--cache-dir", "embed.cache_dir", "Embedding cache directory"},
    {"cluster", "--k-min", "cluster.k_min", "Smallest K for elbow selection"},
    {"cluster", "--k-max", "cluster.k_max", "Largest K for elbow selection"},
    {"cluster", "--k", "cluster.k", "Fix K and skip elbow selection (0 = elbow)"},
    {"cluster", "--restarts", "cluster.restarts", "K-means restarts per K"},
    {"cluster", "--max-iter", "cluster.max_iter", "Lloyd iteration cap"},
    {"cluster", "--tol", "cluster.tol", "Relative WCSS improvement that stops descent"},
    {"project", "--perplexity", "tsne.perplexity", "t-SNE perplexity"},
    {"project", "--iterations", "tsne.iterations", "t-SNE iterations"},
    {"project", "--learning-rate", "tsne.learning_rate", "t-SNE learning rate (0 = auto)"},
    {"project", "--exaggeration", "tsne.exaggeration", "Early exaggeration factor"},
    {"project", "--theta", "tsne.theta", "Barnes-Hut opening angle"},
    {"project", "--pca-dims", "tsne.pca_dims", "PCA pre-reduction target (0 = off)"},
    {"ngrams", "--n-min", "ngram.n_min", "Shortest phrase length"},
    {"ngrams", "--n-max", "ngram.n_max", "Longest phrase length"},
    {"render", "--width", "render.width", "Panel width"},
    {"render", "--height", "render.height", "Panel height"},
    {"render", "--max-phrases", "render.max_phrases", "Phrases per panel"},
    {"render", "--png-width", "render.png_width", "Also write a PNG this wide (0 = SVG only)"},
    {"discover", "--vlm", "discover.provider", "stub, canned or remote"},
    {"discover", "--vlm-endpoint", "discover.endpoint", "Multimodal endpoint URL"},
    {"discover", "--vlm-model", "discover.model", "Multimodal model name"},
    {"discover", "--vlm-profile", "discover.profile", "openai-chat or simple"},
    {"discover", "--response", "discover.response", "Response file for the canned provider"},
    {"review", "--edits", "review.edits", "Review edits file (JSON lines)"},
    {"review", "--approver", "review.approver", "Reviewer id recorded as approver"},
};

constexpr const char* kStages[] = {"crawl",  "preprocess", "embed",    "cluster", "project",
                                   "ngrams", "render",     "discover", "review",  "report"};

struct Bound {
  std::string key;
  CLI::Option* option;
  std::string value;
};

int report_error(silico_status status) {
  std::cerr << "error: " << silico_last_error() << "\n";
  return static_cast<int>(status);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  silico_free_string(s);
  return out;
}

int serve_fixture(const std::string& spec, const std::string& options) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  silico_fixture* fx = nullptr;
  if (const auto st = silico_fixture_serve(spec.c_str(), options.c_str(), &fx); st != SILICO_OK) return report_error(st);
  std::cout << "fixture listening on port " << silico_fixture_port(fx) << std::endl;
  std::thread([fx, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    silico_fixture_stop(fx);
  }).detach();
  silico_fixture_wait(fx);
  char* log = nullptr;
  if (silico_fixture_request_log(fx, &log) == SILICO_OK) std::cerr << "request log: " << take(log) << "\n";
  silico_fixture_destroy(fx);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Submolt corpus analysis pipeline: crawl, refine, embed, cluster, visualize and label."};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_version_flag("--version", std::string(silico_version()));

  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string seed;
  bool force = false;
  app.add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "Run directory");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--set", overrides, "Override any config key: key=value (repeatable)");
  app.add_flag("--force", force, "Recompute even when inputs are unchanged");

  std::deque<Bound> bound;  // stable addresses for CLI11 targets
  std::map<std::string, CLI::App*> commands;
  auto bind_stage_flags = [&](CLI::App* cmd, const std::string& stage) {
    for (const auto& f : kFlags) {
      if (stage != "pipeline" && stage != f.stage) continue;
      bound.push_back({f.key, nullptr, {}});
      bound.back().option = cmd->add_option(f.flag, bound.back().value, f.help);
    }
  };
  for (const char* stage : kStages) {
    auto* cmd = app.add_subcommand(stage, std::string("Run the ") + stage + " stage");
    bind_stage_flags(cmd, stage);
    commands[stage] = cmd;
  }
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  bind_stage_flags(pipeline, "pipeline");

  std::string spec = "eight-themes";
  std::string fixture_out;
  auto* gen = app.add_subcommand("fixture-gen", "Write a synthetic corpus snapshot and manifest to disk");
  gen->add_option("--spec", spec, "Built-in spec name (eight-themes, paper-shape) or JSON spec path");
  gen->add_option("--dir", fixture_out, "Output directory")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  long fail_from_page = 0;
  long throttle = 0;
  auto* serve = app.add_subcommand("fixture-serve", "Serve a synthetic corpus over the listing API");
  serve->add_option("--spec", spec, "Built-in spec name or JSON spec path");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--fail-from-page", fail_from_page, "Answer 500 from this page on (0 = never)");
  serve->add_option("--throttle", throttle, "Answer 429 to this many initial requests");

  std::size_t prompt_k = 8;
  auto* prompt = app.add_subcommand("prompt", "Print the thematic-analysis prompt");
  prompt->add_option("-k", prompt_k, "Number of clusters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*gen) {
    char* summary = nullptr;
    const auto st = silico_fixture_generate(spec.c_str(), fixture_out.c_str(), &summary);
    if (st != SILICO_OK) return report_error(st);
    std::cout << take(summary) << "\n";
    return 0;
  }
  if (*serve) {
    std::string options = "{\"host\":\"" + host + "\",\"port\":" + std::to_string(port) +
                          ",\"throttle_first_n\":" + std::to_string(throttle);
    if (fail_from_page > 0) options += ",\"fail_from_page\":" + std::to_string(fail_from_page);
    options += "}";
    return serve_fixture(spec, options);
  }
  if (*prompt) {
    char* text = nullptr;
    if (const auto st = silico_prompt_render(prompt_k, &text); st != SILICO_OK) return report_error(st);
    std::cout << take(text);
    return 0;
  }

  silico_config* cfg = nullptr;
  if (const auto st = silico_config_create(&cfg); st != SILICO_OK) return report_error(st);
  std::unique_ptr<silico_config, decltype(&silico_config_destroy)> guard(cfg, silico_config_destroy);

  // Precedence: flags over config file over environment.
  auto check = [](silico_status st) {
    if (st != SILICO_OK) throw st;
  };
  try {
    check(silico_config_load_env(cfg));
    if (!config_file.empty()) check(silico_config_load_file(cfg, config_file.c_str()));
    if (!out_dir.empty()) check(silico_config_set(cfg, "out_dir", out_dir.c_str()));
    if (!seed.empty()) check(silico_config_set(cfg, "seed", seed.c_str()));
    if (force) check(silico_config_set(cfg, "force", "true"));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return 1;
      }
      check(silico_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    for (const auto& b : bound) {
      if (b.option->count() > 0) check(silico_config_set(cfg, b.key.c_str(), b.value.c_str()));
    }
  } catch (silico_status st) {
    return report_error(st);
  }

  if (*pipeline) {
    char* summary = nullptr;
    const auto st = silico_run_pipeline(cfg, &summary);
    if (st != SILICO_OK) return report_error(st);
    std::cout << take(summary) << "\n";
    return 0;
  }
  for (const auto& [stage, cmd] : commands) {
    if (!*cmd) continue;
    int cached = 0;
    const auto st = silico_run_stage(cfg, stage.c_str(), &cached);
    if (st != SILICO_OK) return report_error(st);
    std::cout << stage << (cached ? ": up to date" : ": done") << "\n";
    return 0;
  }
  return 1;
}
