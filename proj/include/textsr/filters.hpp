#pragma once

#include <vector>

#include "textsr/image.hpp"

namespace textsr {

// Single-channel helpers. Borders use reflect-101 padding.

// Normalized 1-D Gaussian taps, length `size` (odd).
std::vector<double> gaussian_taps(int size, double sigma);

Image separable_filter(const Image& gray, const std::vector<double>& taps);

struct SobelResult {
  Image gx;
  Image gy;
  Image magnitude;
};

// 3x3 Sobel divided by 4, so a unit step has gradient 1.
SobelResult sobel(const Image& gray);

// 2x2 average pooling; odd trailing rows/columns are dropped.
Image average_pool2(const Image& img);

}  // namespace textsr
