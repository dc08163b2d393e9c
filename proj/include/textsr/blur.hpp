#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "textsr/image.hpp"

namespace textsr::degradation {

enum class KernelType : std::uint8_t { kIsotropic, kAnisotropic, kSinc };

std::string_view to_string(KernelType type);
KernelType kernel_type_from_string(std::string_view name);

// Gaussian kernels use sigma_x/sigma_y/theta (isotropic: sigma_x == sigma_y);
// sinc kernels use cutoff (radians per sample, in (0, pi]).
struct KernelSpec {
  KernelType type = KernelType::kIsotropic;
  int size = 7;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double theta = 0.0;
  double cutoff = 0.0;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct BlurKernel {
  int size = 0;
  std::vector<double> weights;  // size x size, row-major, sums to 1

  double at(int row, int col) const { return weights[row * size + col]; }
};

inline constexpr int kMinKernelSize = 7;
inline constexpr int kMaxKernelSize = 21;

BlurKernel build_blur_kernel(const KernelSpec& spec);

// A size x size kernel with a single 1 at the center.
BlurKernel delta_kernel(int size);

// Per-channel 2-D filtering, out(y, x) = sum K[i][j] img(y + i - r, x + j - r),
// with reflect-101 padding (…c b | a b c…). Every kernel built above is
// point-symmetric, so this is also their convolution.
// The kernel radius must be smaller than both image sides. Rows are
// distributed over `jobs` threads; the result does not depend on it.
Image apply_blur(const Image& img, const BlurKernel& kernel, int jobs = 1);

}  // namespace textsr::degradation
