#pragma once

#include "textsr/image.hpp"
#include "textsr/mask.hpp"

namespace textsr::metrics {

struct CannyOptions {
  double low = 0.1;   // on Sobel/4 magnitudes of [0, 1] images
  double high = 0.2;
  int blur_size = 5;
  double blur_sigma = 1.4;
};

// Gaussian smoothing, Sobel gradients, non-maximum suppression along the
// gradient direction quantized to 0/45/90/135 degrees, then double
// threshold with 8-connected hysteresis. Colour input is converted to luma.
BinaryMap canny_edges(const Image& img, const CannyOptions& options = {});

}  // namespace textsr::metrics
