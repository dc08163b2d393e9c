#include "textsr/quality_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "textsr/error.hpp"
#include "textsr/filters.hpp"

namespace textsr::metrics {
namespace {

// "Valid" separable filtering: output is (h - n + 1) x (w - n + 1).
std::vector<double> valid_filter(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size());
  const int oh = h - n + 1, ow = w - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += taps[k] * src[y * w + x + k];
      tmp[y * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += taps[k] * tmp[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_dims(a, b, "psnr");
  if (a.empty()) throw ShapeError("psnr of empty images");
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const SsimOptions& opt) {
  require_same_dims(a, b, "ssim");
  if (a.height < opt.window || a.width < opt.window) {
    throw ParameterError("ssim needs images of at least " +
                         std::to_string(opt.window) + "x" +
                         std::to_string(opt.window));
  }
  const Image ga = to_gray(a), gb = to_gray(b);
  const int h = ga.height, w = ga.width;
  const auto taps = gaussian_taps(opt.window, opt.sigma);

  const std::size_t n = ga.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ga.pixels[i], y = gb.pixels[i];
    xx[i] = x * x;
    yy[i] = y * y;
    xy[i] = x * y;
  }
  const auto mu_x = valid_filter(ga.pixels, h, w, taps);
  const auto mu_y = valid_filter(gb.pixels, h, w, taps);
  const auto e_xx = valid_filter(xx, h, w, taps);
  const auto e_yy = valid_filter(yy, h, w, taps);
  const auto e_xy = valid_filter(xy, h, w, taps);

  const double c1 = std::pow(opt.k1 * opt.data_range, 2);
  const double c2 = std::pow(opt.k2 * opt.data_range, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

}  // namespace textsr::metrics
