#include "textsr/crops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace textsr::dataset {

double crop_iou(const CropSpec& a, const CropSpec& b) {
  const int ix = std::max(0, std::min(a.x + a.size, b.x + b.size) - std::max(a.x, b.x));
  const int iy = std::max(0, std::min(a.y + a.size, b.y + b.size) - std::max(a.y, b.y));
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.size) * a.size +
                     static_cast<double>(b.size) * b.size - inter;
  return inter / uni;
}

bool crop_contains(const CropSpec& c, Point p) {
  return p.x >= c.x && p.x <= c.x + c.size && p.y >= c.y && p.y <= c.y + c.size;
}

CropPlan plan_crops(const ImageRecord& record, int crop_size, double max_iou) {
  CropPlan plan;
  if (record.width < crop_size || record.height < crop_size) {
    plan.skipped = true;
    return plan;
  }
  const auto& anns = record.annotations;
  std::vector<double> areas(anns.size());
  std::vector<Point> centers(anns.size());
  for (std::size_t i = 0; i < anns.size(); ++i) {
    areas[i] = area(anns[i].quad);
    centers[i] = centroid(anns[i].quad);
  }
  std::vector<std::size_t> order(anns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return areas[a] > areas[b]; });

  std::vector<bool> handled(anns.size(), false);
  for (const std::size_t pick : order) {
    if (handled[pick] || areas[pick] <= 0.0) continue;
    CropSpec c;
    c.size = crop_size;
    c.x = std::clamp(static_cast<int>(std::lround(centers[pick].x - crop_size / 2.0)), 0,
                     record.width - crop_size);
    c.y = std::clamp(static_cast<int>(std::lround(centers[pick].y - crop_size / 2.0)), 0,
                     record.height - crop_size);
    handled[pick] = true;
    const bool overlaps = std::any_of(plan.crops.begin(), plan.crops.end(),
                                      [&](const CropSpec& o) { return crop_iou(c, o) > max_iou; });
    if (overlaps) {
      ++plan.dropped;
      continue;
    }
    for (std::size_t i = 0; i < anns.size(); ++i) {
      if (areas[i] > 0.0 && crop_contains(c, centers[i])) {
        c.covered.push_back(i);
        handled[i] = true;
      }
    }
    plan.crops.push_back(std::move(c));
  }
  return plan;
}

std::vector<TextLineAnnotation> crop_annotations(const ImageRecord& record, const CropSpec& crop) {
  std::vector<TextLineAnnotation> out;
  for (const std::size_t i : crop.covered) {
    TextLineAnnotation a = record.annotations.at(i);
    a.quad = translated(a.quad, -crop.x, -crop.y);
    clamp_quad(a.quad, crop.size, crop.size);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace textsr::dataset
