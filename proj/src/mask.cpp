#include "textsr/mask.hpp"

#include <algorithm>
#include <numeric>

namespace textsr::metrics {

std::size_t BinaryMap::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), 1));
}

TextMask rasterize_text_mask(const std::vector<TextLineAnnotation>& annotations,
                             int width, int height) {
  TextMask mask{BinaryMap(height, width), {}, {}};
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    Quad q = annotations[i].quad;
    if (clamp_quad(q, width, height)) {
      mask.warnings.push_back("annotation " + std::to_string(i) +
                              " clamped to image bounds");
    }
    if (area(q) == 0.0) {
      mask.warnings.push_back("annotation " + std::to_string(i) +
                              " has zero area; skipped");
      continue;
    }
    mask.provenance.push_back(i);
    const BoxI box = bounding_box(q, width, height);
    for (int y = box.y0; y < box.y1; ++y)
      for (int x = box.x0; x < box.x1; ++x)
        if (contains(q, {x + 0.5, y + 0.5})) mask.pixels.at(y, x) = 1;
  }
  return mask;
}

}  // namespace textsr::metrics
