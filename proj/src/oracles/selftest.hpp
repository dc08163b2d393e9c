#pragma once

#include <functional>
#include <string>
#include <vector>

#include "textsr/attention.hpp"

namespace textsr::selftest {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double worst = 0.0;  // suite-specific worst error
  double seconds = 0.0;
};

using BackwardFn = std::function<AttentionGradients(
    const Tensor& query_src, const Tensor& kv_src, const AttentionProjections& proj,
    const AttentionResult& forward, const Tensor& grad_output)>;

// Both attention stages and the two-stage chain against central finite
// differences, `seeds` random configurations with every dimension in [1, 8].
// `backward` replaces the per-stage analytic gradient (mutation testing).
SuiteResult gradient_suite(int seeds = 20, double tolerance = 1e-5,
                           const BackwardFn& backward = cross_attention_backward);

// `evaluations` random cross-attention calls; every weight row must sum to
// one within `tolerance` and be non-negative.
SuiteResult row_sum_suite(int evaluations = 1000, double tolerance = 1e-12);

// PSNR/SSIM/filtering/OCR counting against the direct oracles.
SuiteResult metric_oracle_suite();

std::vector<SuiteResult> run_all(const BackwardFn& backward = cross_attention_backward);

}  // namespace textsr::selftest
