#include "textsr/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "textsr/error.hpp"
#include "textsr/rng.hpp"

namespace textsr::degradation {
namespace {

// Poisson shot noise on a single plane: the image is treated as photon
// counts at a bit depth inferred from its number of distinct 8-bit levels.
std::vector<double> poisson_noise(const std::vector<double>& plane, Rng& rng) {
  std::array<bool, 256> seen{};
  int levels = 0;
  for (double v : plane) {
    const auto q = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    if (!seen[q]) {
      seen[q] = true;
      ++levels;
    }
  }
  const double vals = std::exp2(std::ceil(std::log2(std::max(levels, 1))));
  std::vector<double> noise(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const double v = std::clamp(plane[i], 0.0, 1.0);
    const double counts = static_cast<double>(rng.poisson(v * vals));
    noise[i] = counts / vals - v;
  }
  return noise;
}

}  // namespace

std::string_view to_string(NoiseFamily family) {
  return family == NoiseFamily::kGaussian ? "gaussian" : "poisson";
}

NoiseFamily noise_family_from_string(std::string_view name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "poisson") return NoiseFamily::kPoisson;
  throw ParameterError("unknown noise family '" + std::string(name) + "'");
}

void validate(const NoiseSpec& spec) {
  if (spec.family == NoiseFamily::kGaussian) {
    if (!(spec.strength >= kMinGaussianSigma &&
          spec.strength <= kMaxGaussianSigma)) {
      throw ParameterError("gaussian sigma " + std::to_string(spec.strength) +
                           " outside [1/255, 30/255]");
    }
  } else if (!(spec.strength >= kMinPoissonScale &&
               spec.strength <= kMaxPoissonScale)) {
    throw ParameterError("poisson scale " + std::to_string(spec.strength) +
                         " outside [0.05, 3]");
  }
}

Image add_noise(const Image& img, const NoiseSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Image out = img;
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  const int ch = img.channels;

  if (spec.family == NoiseFamily::kGaussian) {
    if (spec.gray) {
      for (std::size_t p = 0; p < n; ++p) {
        const double e = spec.strength * rng.normal();
        for (int c = 0; c < ch; ++c) out.pixels[p * ch + c] += e;
      }
    } else {
      for (auto& v : out.pixels) v += spec.strength * rng.normal();
    }
  } else if (spec.gray) {
    const Image gray = to_gray(img);
    const auto noise = poisson_noise(gray.pixels, rng);
    for (std::size_t p = 0; p < n; ++p)
      for (int c = 0; c < ch; ++c)
        out.pixels[p * ch + c] += spec.strength * noise[p];
  } else {
    const auto noise = poisson_noise(img.pixels, rng);
    for (std::size_t i = 0; i < out.size(); ++i)
      out.pixels[i] += spec.strength * noise[i];
  }
  return clamp01(std::move(out));
}

Image jpeg_roundtrip(const Image& img, int quality) {
  if (quality < kMinJpegQuality || quality > kMaxJpegQuality) {
    throw ParameterError("jpeg quality " + std::to_string(quality) +
                         " outside [30, 95]");
  }
  Image decoded = decode_image(encode_jpeg(img, quality));
  if (img.channels == 1) decoded = to_gray(decoded);
  return decoded;
}

}  // namespace textsr::degradation
