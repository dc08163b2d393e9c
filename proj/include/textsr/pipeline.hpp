#pragma once

#include <functional>
#include <string>
#include <vector>

#include "textsr/config.hpp"
#include "textsr/ingest.hpp"
#include "textsr/manifest.hpp"
#include "textsr/quality.hpp"

namespace textsr::dataset {

// Output layout under config.output_dir.
inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kRecipesFile = "recipes.jsonl";
inline constexpr const char* kCheckpointFile = "checkpoint.jsonl";

struct PipelineProviders {
  const OcrProvider* ocr = nullptr;         // null: from config.ocr_provider
  const QualityScorer* scorer = nullptr;    // null: from config.scorer
};

struct PipelineResult {
  DatasetManifest manifest;
  std::string manifest_path;
  std::string checkpoint_path;
  std::size_t new_items = 0;     // crops processed in this run
  std::size_t reused_items = 0;  // crops taken from the checkpoint
  std::vector<std::string> warnings;
};

// ingest -> OCR filter -> plan_crops -> quality gate -> degrade passing
// crops -> split -> manifest. Every finished crop is appended to the
// checkpoint, so a rerun with the same config hash only processes what is
// missing. Human verdicts in an existing manifest with the same hash are
// kept.
PipelineResult run_pipeline(const PipelineConfig& config, const PipelineProviders& providers = {});

}  // namespace textsr::dataset
