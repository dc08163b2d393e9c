#pragma once

#include <optional>
#include <string>
#include <vector>

#include "textsr/image.hpp"

namespace textsr::dataset {

class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual std::string name() const = 0;
  virtual double score(const Image& crop) const = 0;
};

// Sharpness heuristic in [1, 5): v = variance of the 4-neighbour Laplacian
// of the 0..255 luma over interior pixels, score = 1 + 4 v / (v + 100).
class LaplacianScorer : public QualityScorer {
 public:
  std::string name() const override { return "laplacian"; }
  double score(const Image& crop) const override;
};

double laplacian_variance(const Image& img);

struct GateOutcome {
  std::optional<double> score;  // absent when the scorer failed
  bool pass = false;
  std::string reason;           // why a crop failed without a score
};

// pass iff score >= threshold (inclusive).
inline bool passes(double score, double threshold) { return score >= threshold; }

GateOutcome gate_one(const Image& crop, const QualityScorer& scorer, double threshold);

struct GateResult {
  std::vector<std::size_t> pass;
  std::vector<std::size_t> fail;
  std::vector<GateOutcome> outcomes;  // one per input crop
};

GateResult quality_gate(const std::vector<Image>& crops, const QualityScorer& scorer,
                        double threshold);

}  // namespace textsr::dataset
