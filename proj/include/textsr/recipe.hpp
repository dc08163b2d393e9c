#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "textsr/blur.hpp"
#include "textsr/image.hpp"
#include "textsr/noise.hpp"
#include "textsr/resample.hpp"

namespace textsr::degradation {

struct BlurStage {
  KernelSpec kernel;
  friend bool operator==(const BlurStage&, const BlurStage&) = default;
};

// Output side = round(reference_side * scale), where the reference is the
// current image (first order) or the final target size (second order and
// the closing resize).
enum class ResizeReference : std::uint8_t { kCurrent, kTarget };

struct ResizeStage {
  ResizeMode mode = ResizeMode::kArea;
  double scale = 1.0;
  ResizeReference reference = ResizeReference::kCurrent;
  friend bool operator==(const ResizeStage&, const ResizeStage&) = default;
};

struct NoiseStage {
  NoiseSpec noise;
  friend bool operator==(const NoiseStage&, const NoiseStage&) = default;
};

struct JpegStage {
  int quality = 95;
  friend bool operator==(const JpegStage&, const JpegStage&) = default;
};

using StageSpec = std::variant<BlurStage, ResizeStage, NoiseStage, JpegStage>;

std::string_view stage_kind(const StageSpec& stage);

struct DegradationRecipe {
  std::uint64_t seed = 0;
  int scale_factor = 4;
  std::string ranges_version;
  std::vector<StageSpec> stages;

  friend bool operator==(const DegradationRecipe&,
                         const DegradationRecipe&) = default;
};

// Sampling ranges for one order of the degradation chain.
struct OrderRanges {
  double blur_prob = 1.0;
  double sinc_prob = 0.1;
  double iso_prob = 0.69;  // otherwise anisotropic
  double sigma_min = 0.2;
  double sigma_max = 3.0;
  double resize_up_prob = 0.2;
  double resize_down_prob = 0.7;  // remainder keeps the size
  double resize_min = 0.15;
  double resize_max = 1.5;
  double gaussian_noise_prob = 0.5;
  double noise_sigma_min = 1.0 / 255.0;
  double noise_sigma_max = 30.0 / 255.0;
  double poisson_min = 0.05;
  double poisson_max = 3.0;
  double gray_noise_prob = 0.4;
  int jpeg_min = 30;
  int jpeg_max = 95;
};

// Frozen parameter ranges. Defaults follow the published x4 second-order
// configuration; config/degradation_v1.json holds the same values.
struct DegradationRanges {
  std::string version = "second-order-x4/v1";
  int kernel_min = 7;
  int kernel_max = 21;
  OrderRanges first;
  OrderRanges second;
  double final_sinc_prob = 0.8;

  static DegradationRanges defaults();
};

DegradationRecipe sample_recipe(std::uint64_t seed,
                                const DegradationRanges& ranges =
                                    DegradationRanges::defaults());

// Throws ParameterError if any stage is outside the sampling ranges.
void validate(const DegradationRecipe& recipe,
              const DegradationRanges& ranges = DegradationRanges::defaults());

// Intermediate images are never shrunk below this side, so that the
// largest kernel always fits.
inline constexpr int kMinWorkingSide = 24;

// HR -> LR. Output is exactly (H / scale_factor) x (W / scale_factor).
Image degrade(const Image& hr, const DegradationRecipe& recipe, int jobs = 1);

// Degrades images[i] with recipes[i] on a worker pool.
std::vector<Image> degrade_corpus(const std::vector<Image>& images,
                                  const std::vector<DegradationRecipe>& recipes,
                                  int jobs);

// Per-image seed for corpus mode.
inline std::uint64_t corpus_image_seed(std::uint64_t corpus_seed,
                                       std::uint64_t image_index) {
  return corpus_seed ^ image_index;
}

void to_json(nlohmann::json& j, const DegradationRecipe& r);
void from_json(const nlohmann::json& j, DegradationRecipe& r);
void to_json(nlohmann::json& j, const DegradationRanges& r);
void from_json(const nlohmann::json& j, DegradationRanges& r);

std::string serialize_recipe(const DegradationRecipe& recipe);
DegradationRecipe parse_recipe(const std::string& line);

}  // namespace textsr::degradation
