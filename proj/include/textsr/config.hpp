#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "textsr/recipe.hpp"

namespace textsr {

inline constexpr double kDefaultQualityThreshold = 4.25;
inline constexpr int kCropSize = 512;

struct PipelineConfig {
  std::string source_dir;
  std::string output_dir;
  std::uint64_t seed = 0;
  double threshold = kDefaultQualityThreshold;
  int scale = 4;
  std::size_t test_size = 0;
  int crop_size = kCropSize;
  double max_crop_iou = 0.5;
  std::string ocr_provider = "sidecar";
  std::string scorer = "laplacian";
  degradation::DegradationRanges ranges = degradation::DegradationRanges::defaults();
  int jobs = 1;  // never affects outputs, so not hashed
};

// Throws ParameterError naming the offending field.
void validate(const PipelineConfig& config);

// Keys: source_dir, output_dir, seed, threshold, scale, test_size,
// crop_size, max_crop_iou, ocr_provider, scorer, jobs, and either
// degradation_ranges (inline object) or degradation_ranges_file (path).
// Unknown keys are rejected. Relative paths resolve against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
PipelineConfig load_config(const std::string& path);
nlohmann::json to_json(const PipelineConfig& config);

// 16 hex digits of FNV-1a over the canonical (key-sorted) JSON of every
// output-affecting field; excludes jobs and output_dir.
std::string config_hash(const PipelineConfig& config);

}  // namespace textsr
