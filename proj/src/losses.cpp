#include "textsr/losses.hpp"

#include <cmath>
#include <exception>

#include "textsr/error.hpp"
#include "textsr/filters.hpp"

namespace textsr::metrics {
namespace {

void require_mask_dims(const Image& img, const BinaryMap& mask, const char* op) {
  if (img.height != mask.height || img.width != mask.width) {
    throw ShapeError(std::string(op) + ": mask is " + std::to_string(mask.height) +
                     "x" + std::to_string(mask.width) + " but image is " +
                     std::to_string(img.height) + "x" + std::to_string(img.width));
  }
}

Image apply_mask(const Image& img, const BinaryMap& mask) {
  Image out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (!mask.at(y, x))
        for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = 0.0;
  return out;
}

template <typename Fn>
auto call_provider(const std::string& kind, const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw ProviderError(kind + " provider '" + name + "' failed: " + e.what());
  }
}

}  // namespace

double GradientPyramidDistance::distance(const Image& a, const Image& b) const {
  require_same_dims(a, b, "perceptual distance");
  Image ga = to_gray(a), gb = to_gray(b);
  double total = 0.0;
  int used = 0;
  for (int level = 0; level < levels_; ++level) {
    if (level > 0) {
      if (ga.height < 6 || ga.width < 6) break;
      ga = average_pool2(ga);
      gb = average_pool2(gb);
    }
    const Image ma = sobel(ga).magnitude, mb = sobel(gb).magnitude;
    double se = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
      const double d = ma.pixels[i] - mb.pixels[i];
      se += d * d;
    }
    total += std::sqrt(se / static_cast<double>(ma.size()));
    ++used;
  }
  return total / used;
}

LossProviders default_loss_providers() {
  static const GradientPyramidDistance perceptual;
  static const IdentityDestylization destylization;
  static const CannyEdgeProvider edge;
  return {perceptual, destylization, edge};
}

double pixel_loss(const Image& sr, const Image& hr) {
  require_same_dims(sr, hr, "pixel loss");
  if (sr.empty()) throw ShapeError("pixel loss of empty images");
  double se = 0.0;
  for (std::size_t i = 0; i < sr.size(); ++i) {
    const double d = sr.pixels[i] - hr.pixels[i];
    se += d * d;
  }
  return std::sqrt(se / static_cast<double>(sr.size()));
}

double masked_edge_loss(const Image& sr, const Image& hr, const BinaryMap& mask,
                        const EdgeMapProvider& edge) {
  require_same_dims(sr, hr, "edge loss");
  require_mask_dims(sr, mask, "edge loss");
  const std::size_t n = mask.count();
  if (n == 0) return 0.0;
  const auto es = call_provider("edge", edge.name(), [&] { return edge.edges(apply_mask(sr, mask)); });
  const auto eh = call_provider("edge", edge.name(), [&] { return edge.edges(apply_mask(hr, mask)); });
  if (es.height != mask.height || es.width != mask.width || eh.height != mask.height ||
      eh.width != mask.width) {
    throw ProviderError("edge provider '" + edge.name() + "' returned a map of the wrong size");
  }
  double se = 0.0;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    if (!mask.values[i]) continue;
    const double d = double(es.values[i]) - double(eh.values[i]);
    se += d * d;
  }
  return std::sqrt(se / static_cast<double>(n));
}

double masked_edge_loss(const Image& sr, const Image& hr, const BinaryMap& mask) {
  return masked_edge_loss(sr, hr, mask, default_loss_providers().edge);
}

double masked_feature_loss(const Image& sr, const Image& hr, const BinaryMap& mask,
                           const DestylizationProvider& destylization) {
  require_same_dims(sr, hr, "odm loss");
  require_mask_dims(sr, mask, "odm loss");
  const std::size_t n = mask.count();
  if (n == 0) return 0.0;
  const auto name = destylization.name();
  const Tensor fs = call_provider("destylization", name, [&] { return destylization.features(sr); });
  const Tensor fh = call_provider("destylization", name, [&] { return destylization.features(hr); });
  if (fs.rank() != 3 || fs.shape() != fh.shape() ||
      fs.dim(0) != static_cast<std::size_t>(mask.height) ||
      fs.dim(1) != static_cast<std::size_t>(mask.width)) {
    throw ProviderError("destylization provider '" + name + "' returned features of shape " +
                        to_string(fs.shape()) + ", expected [" + std::to_string(mask.height) +
                        ", " + std::to_string(mask.width) + ", C]");
  }
  const std::size_t c = fs.dim(2);
  double se = 0.0;
  for (std::size_t p = 0; p < mask.values.size(); ++p) {
    if (!mask.values[p]) continue;
    for (std::size_t k = 0; k < c; ++k) {
      const double d = fs[p * c + k] - fh[p * c + k];
      se += d * d;
    }
  }
  return std::sqrt(se / static_cast<double>(n * c));
}

double weighted_total(const LossComponents& c, const LossWeights& w) {
  return w.pixel * c.pixel + w.perceptual * c.perceptual + w.edge * c.edge + w.odm * c.odm;
}

LossComponents total_loss(const Image& sr, const Image& hr, const BinaryMap& mask,
                          const LossProviders& providers, const LossWeights& weights) {
  LossComponents c;
  c.pixel = pixel_loss(sr, hr);
  const auto pname = providers.perceptual.name();
  c.perceptual = call_provider("perceptual", pname,
                               [&] { return providers.perceptual.distance(sr, hr); });
  if (!std::isfinite(c.perceptual) || c.perceptual < 0.0) {
    throw ProviderError("perceptual provider '" + pname + "' returned " +
                        std::to_string(c.perceptual));
  }
  c.edge = masked_edge_loss(sr, hr, mask, providers.edge);
  c.odm = masked_feature_loss(sr, hr, mask, providers.destylization);
  c.total = weighted_total(c, weights);
  return c;
}

}  // namespace textsr::metrics
