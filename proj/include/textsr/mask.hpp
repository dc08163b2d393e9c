#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textsr/annotation.hpp"

namespace textsr::metrics {

// h x w grid of {0, 1}.
struct BinaryMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  BinaryMap() = default;
  BinaryMap(int h, int w) : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;

  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;
};

struct TextMask {
  BinaryMap pixels;
  std::vector<std::size_t> provenance;  // indices of contributing annotations
  std::vector<std::string> warnings;
};

// A pixel is set iff its center (x + 0.5, y + 0.5) lies inside any quad
// (even-odd rule). Quads are clamped to the image; zero-area quads are
// skipped with a warning.
TextMask rasterize_text_mask(const std::vector<TextLineAnnotation>& annotations,
                             int width, int height);

}  // namespace textsr::metrics
