#include "textsr/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textsr/crops.hpp"
#include "textsr/error.hpp"
#include "textsr/parallel.hpp"
#include "textsr/recipe.hpp"
#include "textsr/statistics.hpp"

namespace textsr::dataset {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Done {
  ManifestEntry entry;
  std::optional<degradation::DegradationRecipe> recipe;
};

// Reads finished crops; a torn trailing line from an interrupted run is
// ignored.
std::map<std::string, Done> read_checkpoint(const std::string& path, const std::string& hash) {
  std::map<std::string, Done> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line)) return done;
  try {
    const json header = json::parse(line);
    if (header.at("config_hash").get<std::string>() != hash) return done;
  } catch (const json::exception&) {
    return done;
  }
  while (std::getline(in, line)) {
    try {
      const json j = json::parse(line);
      Done d{entry_from_json(j.at("entry")), std::nullopt};
      if (!j.at("recipe").is_null()) d.recipe = j.at("recipe").get<degradation::DegradationRecipe>();
      done[d.entry.crop_id] = std::move(d);
    } catch (const std::exception&) {
      break;
    }
  }
  return done;
}

struct CropTask {
  std::size_t ordinal;
  std::size_t record;
  CropSpec spec;
  std::string id;
};

class CheckpointWriter {
 public:
  CheckpointWriter(const std::string& path, const std::string& hash, bool append) {
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw IoError("cannot write checkpoint " + path);
    if (!append) {
      out_ << json{{"kind", "checkpoint"}, {"config_hash", hash}}.dump() << "\n";
      out_.flush();
    }
  }
  void write(const Done& d) {
    const json j = {{"kind", "crop"},
                    {"entry", entry_to_json(d.entry)},
                    {"recipe", d.recipe ? json(*d.recipe) : json(nullptr)}};
    std::lock_guard lock(mu_);
    out_ << j.dump() << "\n";
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const PipelineProviders& providers) {
  validate(config);
  if (!fs::is_directory(config.source_dir)) {
    throw IoError("source directory not found: " + config.source_dir);
  }
  const SidecarOcrProvider default_ocr;
  const LaplacianScorer default_scorer;
  const OcrProvider& ocr = providers.ocr ? *providers.ocr : default_ocr;
  const QualityScorer& scorer = providers.scorer ? *providers.scorer : default_scorer;

  const std::string hash = config_hash(config);
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir / "hr");
  fs::create_directories(out_dir / "lr");

  PipelineResult result;
  result.manifest_path = (out_dir / kManifestFile).string();
  result.checkpoint_path = (out_dir / kCheckpointFile).string();

  std::map<std::string, Done> done = read_checkpoint(result.checkpoint_path, hash);
  CheckpointWriter checkpoint(result.checkpoint_path, hash, !done.empty());

  IngestResult ingested = ingest(config.source_dir, ocr);
  result.warnings = std::move(ingested.warnings);
  DatasetManifest& m = result.manifest;
  m.config_hash = hash;
  m.threshold = config.threshold;
  m.sources.images = ingested.records.size() + ingested.unreadable;
  m.sources.unreadable = ingested.unreadable;

  std::vector<CropTask> tasks;
  for (std::size_t r = 0; r < ingested.records.size(); ++r) {
    const auto& rec = ingested.records[r];
    if (!rec.ocr_valid) continue;
    ++m.sources.ocr_valid;
    CropPlan plan = plan_crops(rec, config.crop_size, config.max_crop_iou);
    if (plan.skipped) {
      ++m.sources.skipped_small;
      continue;
    }
    m.sources.dropped_overlap += plan.dropped;
    for (std::size_t k = 0; k < plan.crops.size(); ++k) {
      tasks.push_back({tasks.size(), r, std::move(plan.crops[k]), rec.id + "_" + std::to_string(k)});
    }
  }

  // Tasks are contiguous per record, so one worker decodes each source once.
  std::vector<std::pair<std::size_t, std::size_t>> by_record;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (by_record.empty() || tasks[by_record.back().first].record != tasks[i].record) {
      by_record.push_back({i, i + 1});
    } else {
      by_record.back().second = i + 1;
    }
  }

  auto artifacts_present = [&](const Done& d) {
    if (!fs::exists(out_dir / d.entry.hr_path)) return false;
    return d.entry.lr_path.empty() || fs::exists(out_dir / d.entry.lr_path);
  };

  std::vector<std::optional<Done>> finished(tasks.size());
  std::vector<char> fresh(tasks.size(), 0);
  std::vector<std::string> decode_failures(by_record.size());
  parallel_for(by_record.size(), config.jobs, [&](std::size_t g) {
    const auto [begin, end] = by_record[g];
    const ImageRecord& rec = ingested.records[tasks[begin].record];
    std::optional<Image> source;
    for (std::size_t t = begin; t < end; ++t) {
      const CropTask& task = tasks[t];
      if (auto it = done.find(task.id); it != done.end() && it->second.entry.crop == task.spec &&
                                        artifacts_present(it->second)) {
        finished[t] = it->second;
        continue;
      }
      if (!source) {
        try {
          source = read_image(rec.source_path);
        } catch (const Error& e) {
          decode_failures[g] = rec.id + ": cannot decode source (" + e.what() + "); skipped";
          return;
        }
      }
      Done d;
      ManifestEntry& e = d.entry;
      e.crop_id = task.id;
      e.source_id = rec.id;
      e.crop = task.spec;
      e.annotations = crop_annotations(rec, task.spec);
      const Image hr = crop(*source, task.spec.x, task.spec.y, task.spec.size, task.spec.size);
      const GateOutcome gate = gate_one(hr, scorer, config.threshold);
      e.quality_score = gate.score;
      e.gate_reason = gate.reason;
      e.auto_verdict = gate.pass ? AutoVerdict::kPass : AutoVerdict::kFail;
      e.hr_path = "hr/" + task.id + ".png";
      write_png((out_dir / e.hr_path).string(), hr);
      if (gate.pass) {
        auto recipe = degradation::sample_recipe(
            degradation::corpus_image_seed(config.seed, task.ordinal), config.ranges);
        recipe.scale_factor = config.scale;
        e.lr_path = "lr/" + task.id + ".png";
        write_png((out_dir / e.lr_path).string(), degradation::degrade(hr, recipe, 1));
        d.recipe = std::move(recipe);
      }
      checkpoint.write(d);
      finished[t] = std::move(d);
      fresh[t] = 1;
    }
  });
  for (auto& w : decode_failures) {
    if (w.empty()) continue;
    result.warnings.push_back(w);
    ++m.sources.unreadable;
  }

  std::map<std::string, Verdict> previous;
  if (fs::exists(result.manifest_path)) {
    try {
      const DatasetManifest old = load_manifest(result.manifest_path);
      if (old.config_hash == hash)
        for (const auto& e : old.entries) previous[e.crop_id] = e.human_verdict;
    } catch (const Error& e) {
      result.warnings.push_back(std::string("existing manifest ignored: ") + e.what());
    }
  }

  std::string recipes;
  std::size_t recipe_line = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!finished[t]) continue;
    Done& d = *finished[t];
    (fresh[t] ? result.new_items : result.reused_items)++;
    ManifestEntry e = d.entry;
    e.recipe_ref.clear();
    if (d.recipe) {
      recipes += degradation::serialize_recipe(*d.recipe) + "\n";
      e.recipe_ref = std::string(kRecipesFile) + ":" + std::to_string(++recipe_line);
    }
    e.human_verdict = Verdict::kPending;
    if (auto it = previous.find(e.crop_id); it != previous.end()) {
      if (it->second != Verdict::kAccepted || !e.lr_path.empty()) e.human_verdict = it->second;
    }
    m.entries.push_back(std::move(e));
  }
  write_file_atomic((out_dir / kRecipesFile).string(), recipes);

  split_train_test(m, config.test_size, config.seed);
  refresh_counts(m);
  save_manifest(result.manifest_path, m);
  return result;
}

}  // namespace textsr::dataset
