#include "textsr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "textsr/error.hpp"
#include "textsr/parallel.hpp"

namespace textsr::degradation {
namespace {

struct Tap {
  int index;
  double weight;
};

using TapTable = std::vector<std::vector<Tap>>;

double cubic(double x) {
  const double a = kBicubicA;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

TapTable area_taps(int in, int out) {
  TapTable taps(out);
  const double step = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * step, hi = (o + 1) * step;
    for (int i = static_cast<int>(std::floor(lo)); i < in && i < hi; ++i) {
      const double overlap = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
      if (overlap > 0.0) taps[o].push_back({i, overlap / step});
    }
  }
  return taps;
}

TapTable interp_taps(int in, int out, ResizeMode mode) {
  TapTable taps(out);
  const double step = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double src = (o + 0.5) * step - 0.5;
    if (mode == ResizeMode::kBilinear) {
      const double s = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const int i0 = static_cast<int>(std::floor(s));
      const int i1 = std::min(i0 + 1, in - 1);
      const double t = s - i0;
      taps[o] = {{i0, 1.0 - t}, {i1, t}};
    } else {
      const int i0 = static_cast<int>(std::floor(src));
      const double t = src - i0;
      for (int k = -1; k <= 2; ++k) {
        taps[o].push_back({std::clamp(i0 + k, 0, in - 1), cubic(t - k)});
      }
    }
  }
  return taps;
}

TapTable make_taps(int in, int out, ResizeMode mode) {
  return mode == ResizeMode::kArea ? area_taps(in, out)
                                   : interp_taps(in, out, mode);
}

}  // namespace

std::string_view to_string(ResizeMode mode) {
  switch (mode) {
    case ResizeMode::kArea: return "area";
    case ResizeMode::kBilinear: return "bilinear";
    case ResizeMode::kBicubic: return "bicubic";
  }
  return "unknown";
}

ResizeMode resize_mode_from_string(std::string_view name) {
  if (name == "area") return ResizeMode::kArea;
  if (name == "bilinear") return ResizeMode::kBilinear;
  if (name == "bicubic") return ResizeMode::kBicubic;
  throw ParameterError("unknown resize mode '" + std::string(name) + "'");
}

Image resize_to(const Image& img, ResizeMode mode, int out_height,
                int out_width, int jobs) {
  if (out_height < 1 || out_width < 1) {
    throw ParameterError("resize output would be " +
                         std::to_string(out_width) + "x" +
                         std::to_string(out_height));
  }
  if (img.empty()) throw ParameterError("cannot resize an empty image");
  if (out_height == img.height && out_width == img.width) return img;

  const int ch = img.channels;
  const TapTable xt = make_taps(img.width, out_width, mode);
  const TapTable yt = make_taps(img.height, out_height, mode);

  // Horizontal pass, then vertical.
  Image tmp(img.height, out_width, ch);
  parallel_for(static_cast<std::size_t>(img.height), jobs, [&](std::size_t y) {
    const double* src = &img.pixels[y * img.width * ch];
    double* dst = &tmp.pixels[y * out_width * ch];
    for (int x = 0; x < out_width; ++x) {
      for (const Tap& t : xt[x]) {
        for (int c = 0; c < ch; ++c)
          dst[x * ch + c] += t.weight * src[t.index * ch + c];
      }
    }
  });
  Image out(out_height, out_width, ch);
  const std::size_t row = static_cast<std::size_t>(out_width) * ch;
  parallel_for(static_cast<std::size_t>(out_height), jobs, [&](std::size_t y) {
    double* dst = &out.pixels[y * row];
    for (const Tap& t : yt[y]) {
      const double* src = &tmp.pixels[t.index * row];
      for (std::size_t j = 0; j < row; ++j) dst[j] += t.weight * src[j];
    }
  });
  return out;
}

Image resize(const Image& img, ResizeMode mode, double scale, int jobs) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("resize scale must be positive");
  }
  const long h = std::lround(img.height * scale);
  const long w = std::lround(img.width * scale);
  if (h < 1 || w < 1) {
    throw ParameterError("resize scale " + std::to_string(scale) +
                         " gives an empty image");
  }
  return resize_to(img, mode, static_cast<int>(h), static_cast<int>(w), jobs);
}

}  // namespace textsr::degradation
