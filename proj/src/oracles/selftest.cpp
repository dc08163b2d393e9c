#include "selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "textsr/blur.hpp"
#include "textsr/gradcheck.hpp"
#include "textsr/guidance.hpp"
#include "textsr/ocr_eval.hpp"
#include "textsr/quality_metrics.hpp"
#include "textsr/rng.hpp"

namespace textsr::selftest {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c) {
  Tensor t({r, c});
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

std::size_t dim(Rng& rng) { return static_cast<std::size_t>(rng.uniform_int(1, 8)); }

double weighted_sum(const Tensor& a, const Tensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * r[i];
  return s;
}

// Checks one attention stage; returns the worst relative error over the
// five gradients.
double check_stage(Rng& rng, std::uint64_t seed, ProjectionRole q_role, ProjectionRole k_role,
                   ProjectionRole v_role, const BackwardFn& backward) {
  const std::size_t nq = dim(rng), nkv = dim(rng), dq_in = dim(rng), dkv_in = dim(rng);
  const std::size_t d = dim(rng), dv = dim(rng);
  LinearProjection wq = LinearProjection::random(q_role, dq_in, d, seed);
  LinearProjection wk = LinearProjection::random(k_role, dkv_in, d, seed);
  LinearProjection wv = LinearProjection::random(v_role, dkv_in, dv, seed);
  const Tensor x = random_tensor(rng, nq, dq_in);
  const Tensor y = random_tensor(rng, nkv, dkv_in);
  const Tensor r = random_tensor(rng, nq, dv);

  const AttentionResult fwd = cross_attention(x, y, {wq, wk, wv});
  const AttentionGradients g = backward(x, y, {wq, wk, wv}, fwd, r);

  auto loss_with = [&](const Tensor& xx, const Tensor& yy, const LinearProjection& q,
                       const LinearProjection& k, const LinearProjection& v) {
    return weighted_sum(cross_attention(xx, yy, {q, k, v}).output, r);
  };
  double worst = 0.0;
  worst = std::max(worst, finite_diff_grad_check(
                              [&](const Tensor& w) {
                                LinearProjection p{q_role, w};
                                return loss_with(x, y, p, wk, wv);
                              },
                              wq.weight, g.query_weight));
  worst = std::max(worst, finite_diff_grad_check(
                              [&](const Tensor& w) {
                                LinearProjection p{k_role, w};
                                return loss_with(x, y, wq, p, wv);
                              },
                              wk.weight, g.key_weight));
  worst = std::max(worst, finite_diff_grad_check(
                              [&](const Tensor& w) {
                                LinearProjection p{v_role, w};
                                return loss_with(x, y, wq, wk, p);
                              },
                              wv.weight, g.value_weight));
  worst = std::max(worst, finite_diff_grad_check(
                              [&](const Tensor& xx) { return loss_with(xx, y, wq, wk, wv); }, x,
                              g.query_src));
  worst = std::max(worst, finite_diff_grad_check(
                              [&](const Tensor& yy) { return loss_with(x, yy, wq, wk, wv); }, y,
                              g.kv_src));
  return worst;
}

// The two stages chained as in the guidance module, gradients w.r.t. all
// six projections.
double check_chain(Rng& rng, std::uint64_t seed) {
  const std::size_t n = dim(rng), ntok = dim(rng), c = dim(rng), dtext = dim(rng);
  const std::size_t ctdm = dim(rng), d = dim(rng), cabs = dim(rng), ctexts = dim(rng);
  guidance::GuidanceParams p;
  p.query_visual = LinearProjection::random(ProjectionRole::kQueryVisual, c, d, seed);
  p.key_concept = LinearProjection::random(ProjectionRole::kKeyConcept, dtext, d, seed);
  p.value_concept = LinearProjection::random(ProjectionRole::kValueConcept, dtext, cabs, seed);
  p.query_abstract = LinearProjection::random(ProjectionRole::kQueryAbstract, cabs, d, seed);
  p.key_detector = LinearProjection::random(ProjectionRole::kKeyDetector, ctdm, d, seed);
  p.value_detector = LinearProjection::random(ProjectionRole::kValueDetector, ctdm, ctexts, seed);
  const guidance::PerceptionInputs in{random_tensor(rng, n, c), random_tensor(rng, ntok, dtext),
                                      random_tensor(rng, n, ctdm)};
  const Tensor r = random_tensor(rng, n, ctexts);
  const auto g = guidance::perception_backward(in, p, r);

  double worst = 0.0;
  auto check = [&](LinearProjection guidance::GuidanceParams::*member, const Tensor& grad) {
    const Tensor w0 = (p.*member).weight;
    worst = std::max(worst, finite_diff_grad_check(
                                [&](const Tensor& w) {
                                  guidance::GuidanceParams q = p;
                                  (q.*member).weight = w;
                                  return weighted_sum(guidance::perception_forward(in, q), r);
                                },
                                w0, grad));
  };
  check(&guidance::GuidanceParams::query_visual, g.query_visual);
  check(&guidance::GuidanceParams::key_concept, g.key_concept);
  check(&guidance::GuidanceParams::value_concept, g.value_concept);
  check(&guidance::GuidanceParams::query_abstract, g.query_abstract);
  check(&guidance::GuidanceParams::key_detector, g.key_detector);
  check(&guidance::GuidanceParams::value_detector, g.value_detector);
  return worst;
}

}  // namespace

SuiteResult gradient_suite(int seeds, double tolerance, const BackwardFn& backward) {
  const auto t0 = Clock::now();
  SuiteResult r{"gradient", true, "", 0.0, 0.0};
  std::ostringstream fails;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = mix_seed(0x6AD, static_cast<std::uint64_t>(s));
    Rng rng(seed);
    const double abs_err = check_stage(rng, seed, ProjectionRole::kQueryVisual,
                                       ProjectionRole::kKeyConcept, ProjectionRole::kValueConcept,
                                       backward);
    const double con_err = check_stage(rng, seed, ProjectionRole::kQueryAbstract,
                                       ProjectionRole::kKeyDetector,
                                       ProjectionRole::kValueDetector, backward);
    const double chain_err = check_chain(rng, seed);
    const double worst = std::max({abs_err, con_err, chain_err});
    r.worst = std::max(r.worst, worst);
    if (!(worst < tolerance)) {
      r.passed = false;
      fails << " seed#" << s << "(abstract " << abs_err << ", concrete " << con_err << ", chain "
            << chain_err << ")";
    }
  }
  std::ostringstream d;
  d << seeds << " seeds, max rel err " << r.worst << " (tol " << tolerance << ")";
  if (!r.passed) d << "; failing:" << fails.str();
  r.detail = d.str();
  r.seconds = elapsed(t0);
  return r;
}

SuiteResult row_sum_suite(int evaluations, double tolerance) {
  const auto t0 = Clock::now();
  SuiteResult r{"attention-row-sum", true, "", 0.0, 0.0};
  int bad = 0;
  for (int i = 0; i < evaluations; ++i) {
    const std::uint64_t seed = mix_seed(0x50F7, static_cast<std::uint64_t>(i));
    Rng rng(seed);
    const std::size_t nq = dim(rng), nkv = dim(rng), din = dim(rng), dkv = dim(rng), d = dim(rng);
    // Occasionally blow up the logits to exercise the max-subtraction path.
    const double gain = rng.bernoulli(0.1) ? 50.0 : 1.0;
    LinearProjection wq = LinearProjection::random(ProjectionRole::kQueryVisual, din, d, seed);
    LinearProjection wk = LinearProjection::random(ProjectionRole::kKeyConcept, dkv, d, seed);
    LinearProjection wv = LinearProjection::random(ProjectionRole::kValueConcept, dkv, d, seed);
    Tensor x = scale(random_tensor(rng, nq, din), gain);
    const Tensor y = random_tensor(rng, nkv, dkv);
    const Tensor a = cross_attention(x, y, {wq, wk, wv}).weights;
    for (std::size_t row = 0; row < a.dim(0); ++row) {
      double s = 0.0;
      bool negative = false;
      for (std::size_t c = 0; c < a.dim(1); ++c) {
        s += a.at(row, c);
        negative |= a.at(row, c) < 0.0;
      }
      r.worst = std::max(r.worst, std::fabs(s - 1.0));
      if (negative || !(std::fabs(s - 1.0) <= tolerance)) ++bad;
    }
  }
  r.passed = bad == 0;
  std::ostringstream d;
  d << evaluations << " evaluations, max |row sum - 1| = " << r.worst << ", bad rows " << bad;
  r.detail = d.str();
  r.seconds = elapsed(t0);
  return r;
}

SuiteResult metric_oracle_suite() {
  const auto t0 = Clock::now();
  SuiteResult r{"metric-oracles", true, "", 0.0, 0.0};
  std::ostringstream fails;
  double worst_psnr = 0.0, worst_ssim = 0.0, worst_conv = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto [a, b] = oracle::fixture_pair(k);
    worst_psnr = std::max(worst_psnr, std::fabs(metrics::psnr(a, b) - oracle::direct_psnr(a, b)));
    worst_ssim = std::max(worst_ssim, std::fabs(metrics::ssim(a, b) - oracle::direct_ssim(a, b)));
    degradation::KernelSpec spec;
    spec.type = static_cast<degradation::KernelType>(k % 3);
    spec.size = 7 + 2 * (k % 4);
    spec.sigma_x = 0.5 + 0.25 * k;
    spec.sigma_y = 0.3 + 0.2 * k;
    spec.theta = 0.3 * k;
    spec.cutoff = 1.2 + 0.15 * k;
    if (spec.type == degradation::KernelType::kIsotropic) spec.sigma_y = spec.sigma_x;
    const auto kernel = degradation::build_blur_kernel(spec);
    const Image fast = degradation::apply_blur(a, kernel, 1 + k % 3);
    const Image slow = oracle::direct_filter(a, kernel);
    for (std::size_t i = 0; i < fast.size(); ++i)
      worst_conv = std::max(worst_conv, std::fabs(fast.pixels[i] - slow.pixels[i]));
  }
  if (!(worst_psnr <= 1e-9)) fails << " psnr " << worst_psnr;
  if (!(worst_ssim <= 1e-6)) fails << " ssim " << worst_ssim;
  if (!(worst_conv <= 1e-9)) fails << " filter " << worst_conv;

  // 2 of 4 lines read correctly.
  const std::vector<std::string> expected = {"Text", "OPEN", "出口", "42"};
  const std::vector<std::string> read = {"text", "OPEN", "出口 ", "4Z"};
  metrics::OcrSample sample{"fixture", Image(40, 40, 3, 0.5), {}, {}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    TextLineAnnotation a;
    a.quad = {Point{1.0 + 9 * i, 2}, Point{8.0 + 9 * i, 2}, Point{8.0 + 9 * i, 9},
              Point{1.0 + 9 * i, 9}};
    a.transcript = expected[i];
    sample.annotations.push_back(a);
  }
  const metrics::FunctionRecognizer rec(
      "fixture", [&](const metrics::LineQuery& q) { return read[q.line_index]; });
  const auto ocr = metrics::ocr_accuracy({sample}, rec);
  const std::size_t hand = oracle::direct_match_count(read, expected);
  if (ocr.correct != hand || hand != 2 || ocr.accuracy() != 0.5) {
    fails << " ocr " << ocr.correct << "/" << ocr.total << " vs oracle " << hand;
  }

  r.passed = fails.str().empty();
  r.worst = std::max({worst_psnr, worst_ssim, worst_conv});
  std::ostringstream d;
  d << "psnr " << worst_psnr << ", ssim " << worst_ssim << ", filter " << worst_conv
    << ", ocr " << ocr.correct << "/" << ocr.total;
  if (!r.passed) d << "; failing:" << fails.str();
  r.detail = d.str();
  r.seconds = elapsed(t0);
  return r;
}

std::vector<SuiteResult> run_all(const BackwardFn& backward) {
  return {gradient_suite(20, 1e-5, backward), row_sum_suite(), metric_oracle_suite()};
}

}  // namespace textsr::selftest
