#pragma once

#include "textsr/image.hpp"

namespace textsr::metrics {

// Returned for identical images, where 10 log10(1 / MSE) diverges.
inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) over all samples of two [0, 1] images, capped at 100 dB.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

// Mean SSIM over every fully-contained Gaussian window of the BT.601 luma.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

}  // namespace textsr::metrics
