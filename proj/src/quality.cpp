#include "textsr/quality.hpp"

#include <cmath>
#include <exception>

#include "textsr/error.hpp"

namespace textsr::dataset {

double laplacian_variance(const Image& img) {
  const Image g = to_gray(img);
  if (g.height < 3 || g.width < 3) throw ShapeError("laplacian needs at least 3x3 pixels");
  const int h = g.height, w = g.width;
  double sum = 0.0, sq = 0.0;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const double l = 255.0 * (g.at(y - 1, x, 0) + g.at(y + 1, x, 0) + g.at(y, x - 1, 0) +
                                g.at(y, x + 1, 0) - 4.0 * g.at(y, x, 0));
      sum += l;
      sq += l * l;
    }
  const double n = static_cast<double>(h - 2) * (w - 2);
  const double mean = sum / n;
  return std::max(0.0, sq / n - mean * mean);
}

double LaplacianScorer::score(const Image& crop) const {
  const double v = laplacian_variance(crop);
  return 1.0 + 4.0 * v / (v + 100.0);
}

GateOutcome gate_one(const Image& crop, const QualityScorer& scorer, double threshold) {
  GateOutcome o;
  try {
    const double s = scorer.score(crop);
    if (!std::isfinite(s)) {
      o.reason = scorer.name() + " returned a non-finite score";
      return o;
    }
    o.score = s;
    o.pass = passes(s, threshold);
  } catch (const std::exception& e) {
    o.reason = scorer.name() + " failed: " + e.what();
  }
  return o;
}

GateResult quality_gate(const std::vector<Image>& crops, const QualityScorer& scorer,
                        double threshold) {
  GateResult r;
  for (std::size_t i = 0; i < crops.size(); ++i) {
    r.outcomes.push_back(gate_one(crops[i], scorer, threshold));
    (r.outcomes.back().pass ? r.pass : r.fail).push_back(i);
  }
  return r;
}

}  // namespace textsr::dataset
