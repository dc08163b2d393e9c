// textsr: dataset build, degradation, evaluation, self-test and review
// service in one binary. Exit codes: 0 ok, 1 run failure, 2 usage/config.

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "selftest.hpp"
#include "textsr/config.hpp"
#include "textsr/error.hpp"
#include "textsr/eval_report.hpp"
#include "textsr/ingest.hpp"
#include "textsr/pipeline.hpp"
#include "textsr/recipe.hpp"
#include "textsr/review_service.hpp"
#include "textsr/statistics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for anything that should map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BuildArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<int> scale;
  std::optional<int> jobs;
  std::optional<std::size_t> test_size;
  std::optional<std::string> source;
  std::optional<std::string> output;
};

int cmd_build(const BuildArgs& a) {
  textsr::PipelineConfig cfg;
  try {
    cfg = textsr::load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.threshold) cfg.threshold = *a.threshold;
    if (a.scale) cfg.scale = *a.scale;
    if (a.jobs) cfg.jobs = *a.jobs;
    if (a.test_size) cfg.test_size = *a.test_size;
    if (a.source) cfg.source_dir = *a.source;
    if (a.output) cfg.output_dir = *a.output;
    textsr::validate(cfg);
    if (!fs::is_directory(cfg.source_dir)) {
      throw UsageError("source directory not found: " + cfg.source_dir);
    }
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  std::cout << "config hash " << textsr::config_hash(cfg) << "\n";

  textsr::dataset::PipelineResult r;
  try {
    r = textsr::dataset::run_pipeline(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "checkpoint: " << (fs::path(cfg.output_dir) / textsr::dataset::kCheckpointFile).string()
              << " (rerun the same command to resume)\n";
    return kExitFailure;
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  const auto& m = r.manifest;
  if (r.reused_items > 0) {
    std::cout << "resumed, " << r.new_items << " new items (" << r.reused_items << " reused)\n";
  } else {
    std::cout << "built, " << r.new_items << " new items\n";
  }
  std::cout << "images " << m.sources.images << ", unreadable " << m.sources.unreadable
            << ", ocr_valid " << m.sources.ocr_valid << ", skipped " << m.sources.skipped_small
            << ", dropped_overlap " << m.sources.dropped_overlap << "\n"
            << "crops " << m.counts.crops << ", pass " << m.counts.auto_pass << ", fail "
            << m.counts.auto_fail << " (threshold " << m.threshold << ")\n"
            << "train " << m.counts.train << ", test " << m.counts.test << "\n"
            << "manifest " << r.manifest_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string manifest;
  std::string pairs;
  std::string sr_dir;
  std::string out = "eval_report.json";
  std::string split = "all";
  std::string recognizer = "reference";
  std::string predictions;
  double min_psnr = 30.0;
  double canny_low = 0.1;
  double canny_high = 0.2;
  textsr::metrics::LossWeights weights;
  int jobs = 1;
};

std::vector<textsr::metrics::EvalItem> items_from_manifest(const EvalArgs& a, std::string& hash) {
  const auto m = textsr::dataset::load_manifest(a.manifest);
  hash = m.config_hash;
  const fs::path root = fs::path(a.manifest).parent_path();
  std::vector<textsr::metrics::EvalItem> items;
  for (const auto& e : m.entries) {
    if (e.lr_path.empty()) continue;  // never degraded, so never super-resolved
    if (a.split != "all" && textsr::dataset::to_string(e.split) != a.split) continue;
    items.push_back({e.crop_id, (root / e.hr_path).string(),
                     (fs::path(a.sr_dir) / (e.crop_id + ".png")).string(), e.annotations});
  }
  return items;
}

// JSONL rows {"id", "hr", "annotations": [...]}; paths relative to the file.
std::vector<textsr::metrics::EvalItem> items_from_pairs(const EvalArgs& a) {
  std::ifstream in(a.pairs);
  if (!in) throw textsr::IoError("cannot open pair list " + a.pairs);
  const fs::path root = fs::path(a.pairs).parent_path();
  std::vector<textsr::metrics::EvalItem> items;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      textsr::metrics::EvalItem it;
      it.id = j.at("id").get<std::string>();
      it.hr_path = (root / j.at("hr").get<std::string>()).string();
      it.sr_path = (fs::path(a.sr_dir) / (it.id + ".png")).string();
      for (const auto& ann : j.at("annotations")) it.annotations.push_back(ann.get<textsr::TextLineAnnotation>());
      items.push_back(std::move(it));
    } catch (const std::exception& e) {
      throw textsr::FormatError(a.pairs + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return items;
}

int cmd_eval(const EvalArgs& a) {
  std::vector<textsr::metrics::EvalItem> items;
  std::unique_ptr<textsr::metrics::TextRecognizer> recognizer;
  std::string hash = "-";
  try {
    if (a.manifest.empty() == a.pairs.empty()) throw UsageError("give exactly one of --manifest or --pairs");
    if (!fs::is_directory(a.sr_dir)) throw UsageError("SR directory not found: " + a.sr_dir);
    items = a.manifest.empty() ? items_from_pairs(a) : items_from_manifest(a, hash);
    if (a.recognizer == "reference") {
      recognizer = std::make_unique<textsr::metrics::ReferenceMatchRecognizer>(a.min_psnr);
    } else if (a.recognizer == "oracle") {
      recognizer = std::make_unique<textsr::metrics::TranscriptOracleRecognizer>();
    } else if (a.recognizer == "table") {
      if (a.predictions.empty()) throw UsageError("--recognizer table needs --predictions");
      recognizer = std::make_unique<textsr::metrics::PredictionTableRecognizer>(
          textsr::metrics::PredictionTableRecognizer::load(a.predictions));
    } else {
      throw UsageError("unknown recognizer " + a.recognizer);
    }
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  std::cout << "config hash " << hash << "\n";

  const textsr::metrics::GradientPyramidDistance perceptual;
  const textsr::metrics::IdentityDestylization destylization;
  textsr::metrics::CannyEdgeProvider edge;
  try {
    textsr::metrics::CannyOptions co;
    co.low = a.canny_low;
    co.high = a.canny_high;
    textsr::metrics::canny_edges(textsr::Image(8, 8, 1), co);  // validates thresholds
    edge = textsr::metrics::CannyEdgeProvider(co);
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  const auto report = textsr::metrics::evaluate(items, *recognizer, {perceptual, destylization, edge},
                                                a.weights, a.jobs);
  for (const auto& img : report.images)
    if (!img.ok) std::cerr << "error: " << img.id << ": " << img.error << "\n";
  textsr::dataset::write_file_atomic(a.out, textsr::metrics::to_json(report).dump(2) + "\n");
  std::cout << textsr::metrics::format_table(report) << "report " << a.out << "\n";
  return report.aggregate.failed ? kExitFailure : 0;
}

int cmd_selftest() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = textsr::selftest::run_all();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.seconds << " s): " << r.detail
              << "\n";
    ok &= r.passed;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (ok ? "selftest passed" : "selftest FAILED") << " in " << secs << " s\n";
  return ok ? 0 : kExitFailure;
}

int cmd_stats(const std::string& manifest_path, std::optional<double> threshold, bool as_json) {
  textsr::dataset::DatasetManifest m;
  try {
    m = textsr::dataset::load_manifest(manifest_path);
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  const double t = threshold.value_or(m.threshold);
  const auto stats = textsr::dataset::dataset_statistics(m);
  const std::size_t pass = textsr::review::pass_count(m, t);
  if (as_json) {
    std::cout << json{{"config_hash", m.config_hash},
                      {"threshold", t},
                      {"pass", pass},
                      {"stats", textsr::dataset::to_json(stats)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "config hash " << m.config_hash << "\n"
              << "quality gate at " << t << ": " << pass << " pass of " << m.entries.size() << "\n"
              << textsr::dataset::format_stats(stats);
  }
  return 0;
}

struct DegradeArgs {
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  int scale = 4;
  int jobs = 1;
  std::string recipe_in;
  std::string recipe_out;
};

int cmd_degrade(const DegradeArgs& a) {
  namespace dg = textsr::degradation;
  dg::DegradationRecipe recipe;
  textsr::Image hr;
  try {
    if (!a.recipe_in.empty()) {
      std::ifstream in(a.recipe_in);
      std::string line;
      if (!in || !std::getline(in, line)) throw textsr::IoError("cannot read recipe " + a.recipe_in);
      recipe = dg::parse_recipe(line);
      dg::validate(recipe);
    } else {
      recipe = dg::sample_recipe(a.seed);
      recipe.scale_factor = a.scale;
    }
    hr = textsr::read_image(a.input);
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  try {
    textsr::write_png(a.output, dg::degrade(hr, recipe, a.jobs));
    if (!a.recipe_out.empty()) {
      textsr::dataset::write_file_atomic(a.recipe_out, dg::serialize_recipe(recipe) + "\n");
    }
  } catch (const textsr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  std::cout << dg::serialize_recipe(recipe) << "\n";
  return 0;
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind expects host:port, got " + bind);
  try {
    std::size_t used = 0;
    const int port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("port");
    return {bind.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw UsageError("bad port in --bind " + bind);
  }
}

int cmd_serve(const std::string& manifest, const std::string& bind, const std::string& static_dir) {
  auto [host, port] = parse_bind(bind);
  // Block termination signals in every thread; a dedicated thread waits for
  // them and stops the server, after which run() persists the manifest.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<textsr::review::ReviewStore> store;
  try {
    store = std::make_unique<textsr::review::ReviewStore>(manifest);
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  textsr::review::ReviewServer server(*store);
  int bound = 0;
  try {
    bound = server.bind({host, port, static_dir});
  } catch (const textsr::Error& e) {
    throw UsageError(e.what());
  }
  std::cout << "config hash " << store->snapshot().config_hash << "\n"
            << "serving " << manifest << " on http://" << host << ":" << bound << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  // run() also returns if the listener fails; wake the waiter in that case.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "verdicts saved to " << manifest << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text image super-resolution dataset and evaluation toolkit"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Run the dataset pipeline");
  b->add_option("--config", build.config, "Pipeline config (JSON)")->required();
  b->add_option("--seed", build.seed, "Override seed");
  b->add_option("--threshold", build.threshold, "Override quality threshold (inclusive)");
  b->add_option("--scale", build.scale, "Override HR/LR scale factor");
  b->add_option("--jobs", build.jobs, "Worker threads");
  b->add_option("--test-size", build.test_size, "Override test split size");
  b->add_option("--source", build.source, "Override source directory");
  b->add_option("--output", build.output, "Override output directory");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate SR outputs against HR crops");
  e->add_option("--manifest", ev.manifest, "Dataset manifest");
  e->add_option("--pairs", ev.pairs, "Pair list (JSONL) instead of a manifest");
  e->add_option("--sr-dir", ev.sr_dir, "Directory of <id>.png SR images")->required();
  e->add_option("--out", ev.out, "Report path (JSON)");
  e->add_option("--split", ev.split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  e->add_option("--recognizer", ev.recognizer, "reference, oracle or table");
  e->add_option("--predictions", ev.predictions, "JSONL predictions for --recognizer table");
  e->add_option("--min-psnr", ev.min_psnr, "Line PSNR needed by the reference recognizer");
  e->add_option("--canny-low", ev.canny_low);
  e->add_option("--canny-high", ev.canny_high);
  e->add_option("--lambda1", ev.weights.pixel, "Pixel L2 weight");
  e->add_option("--lambda2", ev.weights.perceptual, "Perceptual weight");
  e->add_option("--lambda3", ev.weights.edge, "Edge weight");
  e->add_option("--lambda4", ev.weights.odm, "Destylized feature weight");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* st = app.add_subcommand("selftest", "Gradient, attention and metric oracle checks");

  std::string stats_manifest;
  std::optional<double> stats_threshold;
  bool stats_json = false;
  auto* s = app.add_subcommand("stats", "Dataset statistics from a manifest");
  s->add_option("--manifest", stats_manifest)->required();
  s->add_option("--threshold", stats_threshold, "Quality-gate what-if threshold");
  s->add_flag("--json", stats_json);

  std::string serve_manifest, bind = "127.0.0.1:8765", static_dir;
  auto* sv = app.add_subcommand("serve", "HTTP review service");
  sv->add_option("--manifest", serve_manifest)->required();
  sv->add_option("--bind", bind, "host:port (port 0 picks a free one)");
  sv->add_option("--static", static_dir, "UI assets served at /");

  DegradeArgs dg;
  auto* d = app.add_subcommand("degrade", "Degrade one HR image");
  d->add_option("--input", dg.input)->required();
  d->add_option("--output", dg.output)->required();
  d->add_option("--seed", dg.seed);
  d->add_option("--scale", dg.scale);
  d->add_option("--jobs", dg.jobs)->check(CLI::PositiveNumber);
  d->add_option("--recipe", dg.recipe_in, "Replay a recipe file instead of sampling");
  d->add_option("--recipe-out", dg.recipe_out, "Write the recipe used");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*b) return cmd_build(build);
    if (*e) return cmd_eval(ev);
    if (*st) return cmd_selftest();
    if (*s) return cmd_stats(stats_manifest, stats_threshold, stats_json);
    if (*sv) return cmd_serve(serve_manifest, bind, static_dir);
    if (*d) return cmd_degrade(dg);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
