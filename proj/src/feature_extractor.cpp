#include "textsr/feature_extractor.hpp"

#include <algorithm>
#include <cmath>

#include "textsr/error.hpp"
#include "textsr/rng.hpp"

namespace textsr {

ConvLayer ConvLayer::random(std::size_t c_in, std::size_t c_out,
                            std::size_t stride, std::uint64_t seed) {
  ConvLayer layer;
  layer.in_channels = c_in;
  layer.out_channels = c_out;
  layer.stride = stride;
  layer.weights.resize(9 * c_in * c_out);
  layer.bias.assign(c_out, 0.0);
  Rng rng(seed);
  // He-style fan-in scaling.
  const double s = std::sqrt(2.0 / (9.0 * static_cast<double>(c_in)));
  for (auto& w : layer.weights) w = s * rng.normal();
  for (auto& b : layer.bias) b = 0.01 * rng.normal();
  return layer;
}

FeatureExtractorParams FeatureExtractorParams::random(std::size_t channels,
                                                      std::uint64_t seed) {
  if (channels == 0) throw ParameterError("feature channels must be positive");
  const std::size_t c1 = std::max<std::size_t>(1, channels / 4);
  const std::size_t c2 = std::max<std::size_t>(1, channels / 2);
  FeatureExtractorParams p;
  p.down1 = ConvLayer::random(3, c1, 2, mix_seed(seed, 1));
  p.res1 = {ConvLayer::random(c1, c1, 1, mix_seed(seed, 2)),
            ConvLayer::random(c1, c1, 1, mix_seed(seed, 3))};
  p.down2 = ConvLayer::random(c1, c2, 2, mix_seed(seed, 4));
  p.res2 = {ConvLayer::random(c2, c2, 1, mix_seed(seed, 5)),
            ConvLayer::random(c2, c2, 1, mix_seed(seed, 6))};
  p.down3 = ConvLayer::random(c2, channels, 2, mix_seed(seed, 7));
  // Residual branches start small so early features stay well-scaled.
  for (auto* block : {&p.res1, &p.res2})
    for (auto& w : block->second.weights) w *= 0.1;
  return p;
}

Tensor conv2d(const Tensor& x, const ConvLayer& layer) {
  if (x.rank() != 3 || x.dim(2) != layer.in_channels) {
    throw ShapeError("conv2d expects [h x w x " +
                     std::to_string(layer.in_channels) + "], got " +
                     to_string(x.shape()));
  }
  const std::size_t h = x.dim(0), w = x.dim(1), cin = layer.in_channels,
                    cout = layer.out_channels, s = layer.stride;
  const std::size_t oh = (h + s - 1) / s, ow = (w + s - 1) / s;
  Tensor out({oh, ow, cout});
  const double* in = x.data().data();
  const double* wt = layer.weights.data();
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      double* acc = &out.at(oy, ox, 0);
      std::copy(layer.bias.begin(), layer.bias.end(), acc);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * s + ky) - 1;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox * s + kx) - 1;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
          const double* px = in + (static_cast<std::size_t>(iy) * w +
                                   static_cast<std::size_t>(ix)) * cin;
          const double* wk = wt + (ky * 3 + kx) * cin * cout;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const double v = px[ci];
            const double* wrow = wk + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) acc[co] += v * wrow[co];
          }
        }
      }
    }
  }
  return out;
}

Tensor leaky_relu(Tensor x, double slope) {
  for (auto& v : x.values())
    if (v < 0.0) v *= slope;
  return x;
}

Tensor residual_forward(const Tensor& x, const ResidualBlock& block) {
  Tensor inner = conv2d(leaky_relu(conv2d(x, block.first)), block.second);
  return add(x, inner);
}

Tensor conv_residual_forward(const Tensor& x,
                             const FeatureExtractorParams& params) {
  if (x.rank() != 3 || x.dim(2) != 3) {
    throw ShapeError("feature extractor expects [H x W x 3], got " +
                     to_string(x.shape()));
  }
  if (x.dim(0) % kFeatureDownsample || x.dim(1) % kFeatureDownsample) {
    throw ShapeError("feature extractor input " + to_string(x.shape()) +
                     " has a side not divisible by 8");
  }
  Tensor t = leaky_relu(conv2d(x, params.down1));
  t = residual_forward(t, params.res1);
  t = leaky_relu(conv2d(t, params.down2));
  t = residual_forward(t, params.res2);
  t = conv2d(t, params.down3);
  require_finite(t, "feature extractor output");
  return t;
}

}  // namespace textsr
