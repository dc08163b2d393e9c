#pragma once

#include <cstdint>
#include <vector>

#include "textsr/tensor.hpp"

namespace textsr {

// 3x3 convolution, zero padding 1. Weights laid out [ky][kx][c_in][c_out].
struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t stride = 1;
  std::vector<double> weights;
  std::vector<double> bias;

  static ConvLayer random(std::size_t c_in, std::size_t c_out,
                          std::size_t stride, std::uint64_t seed);
};

// x + inner(leaky(outer(x))) with matching channel counts.
struct ResidualBlock {
  ConvLayer first;
  ConvLayer second;
};

// conv(s2) -> res -> conv(s2) -> res -> conv(s2), leaky-ReLU(0.2) after the
// first two convolutions. Channel widths grow c/4 -> c/2 -> c.
struct FeatureExtractorParams {
  ConvLayer down1;
  ResidualBlock res1;
  ConvLayer down2;
  ResidualBlock res2;
  ConvLayer down3;

  std::size_t out_channels() const { return down3.out_channels; }

  static FeatureExtractorParams random(std::size_t channels,
                                       std::uint64_t seed);
};

inline constexpr double kLeakySlope = 0.2;
inline constexpr std::size_t kFeatureDownsample = 8;

Tensor conv2d(const Tensor& x, const ConvLayer& layer);
Tensor leaky_relu(Tensor x, double slope = kLeakySlope);
Tensor residual_forward(const Tensor& x, const ResidualBlock& block);

// [H x W x 3] -> [H/8 x W/8 x c]. H and W must be divisible by 8.
Tensor conv_residual_forward(const Tensor& x,
                             const FeatureExtractorParams& params);

}  // namespace textsr
