#include "textsr/canny.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "textsr/error.hpp"
#include "textsr/filters.hpp"

namespace textsr::metrics {

BinaryMap canny_edges(const Image& img, const CannyOptions& opt) {
  if (!(opt.low > 0.0) || !(opt.low < opt.high)) {
    throw ParameterError("canny thresholds need 0 < low < high, got low=" +
                         std::to_string(opt.low) +
                         " high=" + std::to_string(opt.high));
  }
  const Image gray = to_gray(img);
  const int h = gray.height, w = gray.width;
  const SobelResult g = sobel(separable_filter(gray, gaussian_taps(opt.blur_size, opt.blur_sigma)));

  auto mag = [&](int y, int x) {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return g.magnitude.at(y, x, 0);
  };

  // Thin: keep a pixel only if it beats the neighbour behind it along the
  // gradient and ties or beats the one ahead, so plateaus of equal
  // magnitude straddling a step still yield a single pixel.
  std::vector<double> thin(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double m = mag(y, x);
      if (m < opt.low) continue;
      double deg = std::atan2(g.gy.at(y, x, 0), g.gx.at(y, x, 0)) * 180.0 / std::numbers::pi;
      if (deg < 0) deg += 180.0;
      int dx, dy;
      if (deg < 22.5 || deg >= 157.5) {
        dx = 1, dy = 0;
      } else if (deg < 67.5) {
        dx = 1, dy = 1;
      } else if (deg < 112.5) {
        dx = 0, dy = 1;
      } else {
        dx = -1, dy = 1;
      }
      if (m > mag(y - dy, x - dx) && m >= mag(y + dy, x + dx)) thin[y * w + x] = m;
    }

  BinaryMap edges(h, w);
  std::vector<int> stack;
  for (int i = 0; i < h * w; ++i) {
    if (thin[i] >= opt.high && !edges.values[i]) {
      edges.values[i] = 1;
      stack.push_back(i);
    }
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int py = p / w, px = p % w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int ny = py + dy, nx = px + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const int q = ny * w + nx;
          if (!edges.values[q] && thin[q] >= opt.low) {
            edges.values[q] = 1;
            stack.push_back(q);
          }
        }
    }
  }
  return edges;
}

}  // namespace textsr::metrics
