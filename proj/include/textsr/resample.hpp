#pragma once

#include <cstdint>
#include <string_view>

#include "textsr/image.hpp"

namespace textsr::degradation {

enum class ResizeMode : std::uint8_t { kArea, kBilinear, kBicubic };

std::string_view to_string(ResizeMode mode);
ResizeMode resize_mode_from_string(std::string_view name);

inline constexpr double kBicubicA = -0.5;

// Resamples to an explicit size. Pixel centers sit at half-integer
// coordinates; bilinear/bicubic clamp at the borders, area integrates the
// exact source footprint of each output pixel.
Image resize_to(const Image& img, ResizeMode mode, int out_height,
                int out_width, int jobs = 1);

// Output side = round(side * scale); throws if that is < 1.
Image resize(const Image& img, ResizeMode mode, double scale, int jobs = 1);

}  // namespace textsr::degradation
