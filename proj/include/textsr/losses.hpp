#pragma once

#include <string>

#include "textsr/canny.hpp"
#include "textsr/image.hpp"
#include "textsr/mask.hpp"
#include "textsr/tensor.hpp"

namespace textsr::metrics {

class PerceptualDistanceProvider {
 public:
  virtual ~PerceptualDistanceProvider() = default;
  virtual std::string name() const = 0;
  // >= 0, and 0 for identical inputs.
  virtual double distance(const Image& a, const Image& b) const = 0;
};

// Features must come back as [H x W x C] aligned with the input pixels so
// the text mask can be applied to them.
class DestylizationProvider {
 public:
  virtual ~DestylizationProvider() = default;
  virtual std::string name() const = 0;
  virtual Tensor features(const Image& img) const = 0;
};

class EdgeMapProvider {
 public:
  virtual ~EdgeMapProvider() = default;
  virtual std::string name() const = 0;
  virtual BinaryMap edges(const Image& img) const = 0;
};

// Not LPIPS: RMS difference of Sobel gradient magnitude over a 3-level
// average-pooled pyramid of the luma, averaged across levels.
class GradientPyramidDistance : public PerceptualDistanceProvider {
 public:
  explicit GradientPyramidDistance(int levels = 3) : levels_(levels) {}
  std::string name() const override { return "gradient-pyramid"; }
  double distance(const Image& a, const Image& b) const override;

 private:
  int levels_;
};

// Stand-in for a learned destylization network: the pixels themselves.
class IdentityDestylization : public DestylizationProvider {
 public:
  std::string name() const override { return "identity"; }
  Tensor features(const Image& img) const override { return to_tensor(img); }
};

class CannyEdgeProvider : public EdgeMapProvider {
 public:
  explicit CannyEdgeProvider(CannyOptions options = {}) : options_(options) {}
  std::string name() const override { return "canny"; }
  BinaryMap edges(const Image& img) const override { return canny_edges(img, options_); }

 private:
  CannyOptions options_;
};

struct LossProviders {
  const PerceptualDistanceProvider& perceptual;
  const DestylizationProvider& destylization;
  const EdgeMapProvider& edge;
};

// Shared default instances.
LossProviders default_loss_providers();

struct LossWeights {
  double pixel = 1.0;
  double perceptual = 2.0;
  double edge = 1.0;
  double odm = 10.0;
};

struct LossComponents {
  double pixel = 0.0;
  double perceptual = 0.0;
  double edge = 0.0;
  double odm = 0.0;
  double total = 0.0;
};

// Root mean square of sr - hr over every sample.
double pixel_loss(const Image& sr, const Image& hr);

// Both images are multiplied by the mask before edge extraction, so pixels
// outside the mask cannot influence the result. RMS over mask pixels of the
// edge-map difference; 0 for an empty mask.
double masked_edge_loss(const Image& sr, const Image& hr, const BinaryMap& mask,
                        const EdgeMapProvider& edge);
double masked_edge_loss(const Image& sr, const Image& hr, const BinaryMap& mask);

// RMS over masked pixels (all feature channels) of the feature difference.
double masked_feature_loss(const Image& sr, const Image& hr, const BinaryMap& mask,
                           const DestylizationProvider& destylization);

double weighted_total(const LossComponents& c, const LossWeights& w);

LossComponents total_loss(const Image& sr, const Image& hr, const BinaryMap& mask,
                          const LossProviders& providers,
                          const LossWeights& weights = {});

}  // namespace textsr::metrics
