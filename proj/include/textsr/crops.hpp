#pragma once

#include <cstddef>
#include <vector>

#include "textsr/config.hpp"
#include "textsr/ingest.hpp"

namespace textsr::dataset {

struct CropSpec {
  int x = 0;
  int y = 0;
  int size = kCropSize;
  std::vector<std::size_t> covered;  // annotations whose centroid lies in the crop

  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

struct CropPlan {
  std::vector<CropSpec> crops;
  bool skipped = false;       // image smaller than the crop on some side
  std::size_t dropped = 0;    // candidates rejected by the IoU limit
};

double crop_iou(const CropSpec& a, const CropSpec& b);

// Centroid containment uses the closed square [x, x + size] x [y, y + size].
bool crop_contains(const CropSpec& c, Point p);

// Greedy cover: take the uncovered line of largest area (ties: lowest
// index), centre a crop on its centroid, clamp it into the image and mark
// every line whose centroid it contains. A candidate whose IoU with an
// earlier crop exceeds `max_iou` is not emitted; its line still counts as
// handled.
CropPlan plan_crops(const ImageRecord& record, int crop_size = kCropSize, double max_iou = 0.5);

// Annotations of `covered` lines shifted into crop coordinates and clamped
// to the crop.
std::vector<TextLineAnnotation> crop_annotations(const ImageRecord& record, const CropSpec& crop);

}  // namespace textsr::dataset
