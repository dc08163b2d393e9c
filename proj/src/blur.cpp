#include "textsr/blur.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "textsr/error.hpp"
#include "textsr/parallel.hpp"

namespace textsr::degradation {
namespace {

void check_size(int size) {
  if (size % 2 == 0 || size < kMinKernelSize || size > kMaxKernelSize) {
    throw ParameterError("kernel size must be odd and in [7, 21], got " +
                         std::to_string(size));
  }
}

// Reflect-101 index into [0, n).
int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

}  // namespace

std::string_view to_string(KernelType type) {
  switch (type) {
    case KernelType::kIsotropic: return "iso";
    case KernelType::kAnisotropic: return "aniso";
    case KernelType::kSinc: return "sinc";
  }
  return "unknown";
}

KernelType kernel_type_from_string(std::string_view name) {
  if (name == "iso") return KernelType::kIsotropic;
  if (name == "aniso") return KernelType::kAnisotropic;
  if (name == "sinc") return KernelType::kSinc;
  throw ParameterError("unknown kernel type '" + std::string(name) + "'");
}

BlurKernel build_blur_kernel(const KernelSpec& spec) {
  check_size(spec.size);
  const int r = spec.size / 2;
  BlurKernel k{spec.size, std::vector<double>(spec.size * spec.size)};

  if (spec.type == KernelType::kSinc) {
    const double wc = spec.cutoff;
    if (!(wc > 0.0 && wc <= std::numbers::pi)) {
      throw ParameterError("sinc cutoff must be in (0, pi]");
    }
    // Circular low-pass: wc * J1(wc * d) / (2 pi d); limit wc^2 / (4 pi).
    for (int y = -r; y <= r; ++y) {
      for (int x = -r; x <= r; ++x) {
        const double d = std::hypot(x, y);
        k.weights[(y + r) * spec.size + (x + r)] =
            d == 0.0 ? wc * wc / (4.0 * std::numbers::pi)
                     : wc * std::cyl_bessel_j(1.0, wc * d) /
                           (2.0 * std::numbers::pi * d);
      }
    }
  } else {
    const double sx = spec.sigma_x;
    const double sy =
        spec.type == KernelType::kIsotropic ? spec.sigma_x : spec.sigma_y;
    if (!(sx > 0.0) || !(sy > 0.0)) {
      throw ParameterError("gaussian sigma must be positive");
    }
    const double theta =
        spec.type == KernelType::kIsotropic ? 0.0 : spec.theta;
    // Covariance R diag(sx^2, sy^2) R^T, inverted in closed form.
    const double c = std::cos(theta), s = std::sin(theta);
    const double vx = sx * sx, vy = sy * sy;
    const double a = c * c * vx + s * s * vy;
    const double b = c * s * (vx - vy);
    const double d = s * s * vx + c * c * vy;
    const double det = a * d - b * b;
    const double ia = d / det, ib = -b / det, id = a / det;
    for (int y = -r; y <= r; ++y) {
      for (int x = -r; x <= r; ++x) {
        const double q = ia * x * x + 2.0 * ib * x * y + id * y * y;
        k.weights[(y + r) * spec.size + (x + r)] = std::exp(-0.5 * q);
      }
    }
  }

  const double total = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
  if (!std::isfinite(total) || total == 0.0) {
    throw NumericError("blur kernel cannot be normalized");
  }
  for (auto& w : k.weights) w /= total;
  return k;
}

BlurKernel delta_kernel(int size) {
  if (size <= 0 || size % 2 == 0) {
    throw ParameterError("delta kernel size must be odd");
  }
  BlurKernel k{size, std::vector<double>(size * size, 0.0)};
  k.weights[(size / 2) * size + size / 2] = 1.0;
  return k;
}

Image apply_blur(const Image& img, const BlurKernel& kernel, int jobs) {
  const int r = kernel.size / 2;
  if (kernel.size <= 0 || kernel.size % 2 == 0 ||
      kernel.weights.size() != static_cast<std::size_t>(kernel.size) * kernel.size) {
    throw ParameterError("malformed blur kernel");
  }
  if (r >= img.height || r >= img.width) {
    throw ParameterError("blur kernel of size " + std::to_string(kernel.size) +
                         " does not fit a " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + " image");
  }
  const int w = img.width, h = img.height, ch = img.channels;
  const std::size_t padded_w = static_cast<std::size_t>(w + 2 * r) * ch;

  // Horizontally padded copy of every row.
  std::vector<double> padded(padded_w * h);
  for (int y = 0; y < h; ++y) {
    double* dst = &padded[y * padded_w];
    for (int x = -r; x < w + r; ++x) {
      const double* src = &img.pixels[(static_cast<std::size_t>(y) * w +
                                       reflect(x, w)) * ch];
      for (int c = 0; c < ch; ++c) dst[(x + r) * ch + c] = src[c];
    }
  }

  Image out(h, w, ch);
  const std::size_t row_len = static_cast<std::size_t>(w) * ch;
  parallel_for(static_cast<std::size_t>(h), jobs, [&](std::size_t yi) {
    const int y = static_cast<int>(yi);
    double* dst = &out.pixels[yi * row_len];
    for (int ky = 0; ky < kernel.size; ++ky) {
      const double* src = &padded[reflect(y + ky - r, h) * padded_w];
      for (int kx = 0; kx < kernel.size; ++kx) {
        const double wgt = kernel.weights[ky * kernel.size + kx];
        const double* s = src + static_cast<std::size_t>(kx) * ch;
        for (std::size_t j = 0; j < row_len; ++j) dst[j] += wgt * s[j];
      }
    }
  });
  return out;
}

}  // namespace textsr::degradation
