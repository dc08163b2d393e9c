#include "textsr/filters.hpp"

#include <cmath>
#include <numeric>

#include "textsr/error.hpp"

namespace textsr {
namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

void require_gray(const Image& img, const char* op) {
  if (img.channels != 1) {
    throw ShapeError(std::string(op) + " expects a single-channel image");
  }
}

}  // namespace

std::vector<double> gaussian_taps(int size, double sigma) {
  if (size <= 0 || size % 2 == 0 || !(sigma > 0.0)) {
    throw ParameterError("gaussian taps need odd size and sigma > 0");
  }
  std::vector<double> taps(size);
  const int r = size / 2;
  for (int i = -r; i <= r; ++i)
    taps[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= total;
  return taps;
}

Image separable_filter(const Image& gray, const std::vector<double>& taps) {
  require_gray(gray, "separable_filter");
  const int h = gray.height, w = gray.width, r = static_cast<int>(taps.size()) / 2;
  Image tmp(h, w, 1), out(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * gray.at(y, reflect(x + k, w), 0);
      tmp.at(y, x, 0) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * tmp.at(reflect(y + k, h), x, 0);
      out.at(y, x, 0) = acc;
    }
  return out;
}

SobelResult sobel(const Image& gray) {
  require_gray(gray, "sobel");
  const int h = gray.height, w = gray.width;
  SobelResult s{Image(h, w, 1), Image(h, w, 1), Image(h, w, 1)};
  for (int y = 0; y < h; ++y) {
    const int ym = reflect(y - 1, h), yp = reflect(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = reflect(x - 1, w), xp = reflect(x + 1, w);
      auto p = [&](int yy, int xx) { return gray.at(yy, xx, 0); };
      const double gx = (p(ym, xp) + 2.0 * p(y, xp) + p(yp, xp)) -
                        (p(ym, xm) + 2.0 * p(y, xm) + p(yp, xm));
      const double gy = (p(yp, xm) + 2.0 * p(yp, x) + p(yp, xp)) -
                        (p(ym, xm) + 2.0 * p(ym, x) + p(ym, xp));
      s.gx.at(y, x, 0) = gx / 4.0;
      s.gy.at(y, x, 0) = gy / 4.0;
      s.magnitude.at(y, x, 0) = std::hypot(gx, gy) / 4.0;
    }
  }
  return s;
}

Image average_pool2(const Image& img) {
  const int h = img.height / 2, w = img.width / 2, ch = img.channels;
  if (h < 1 || w < 1) throw ShapeError("image too small to pool");
  Image out(h, w, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        out.at(y, x, c) = 0.25 * (img.at(2 * y, 2 * x, c) + img.at(2 * y, 2 * x + 1, c) +
                                  img.at(2 * y + 1, 2 * x, c) +
                                  img.at(2 * y + 1, 2 * x + 1, c));
  return out;
}

}  // namespace textsr
