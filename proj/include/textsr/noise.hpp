#pragma once

#include <cstdint>
#include <string_view>

#include "textsr/image.hpp"

namespace textsr::degradation {

enum class NoiseFamily : std::uint8_t { kGaussian, kPoisson };

std::string_view to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(std::string_view name);

// strength is the Gaussian sigma (in [0,1] intensity units) or the Poisson
// scale. gray = one noise field shared by all channels.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGaussian;
  double strength = 1.0 / 255.0;
  bool gray = false;
  std::uint64_t seed = 0;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

inline constexpr double kMinGaussianSigma = 1.0 / 255.0;
inline constexpr double kMaxGaussianSigma = 30.0 / 255.0;
inline constexpr double kMinPoissonScale = 0.05;
inline constexpr double kMaxPoissonScale = 3.0;

void validate(const NoiseSpec& spec);

// Adds seeded noise and clamps to [0, 1].
Image add_noise(const Image& img, const NoiseSpec& spec);

inline constexpr int kMinJpegQuality = 30;
inline constexpr int kMaxJpegQuality = 95;

// 8-bit quantize, baseline JPEG encode at `quality`, decode.
Image jpeg_roundtrip(const Image& img, int quality);

}  // namespace textsr::degradation
