#pragma once

// Slow, direct reference implementations. They share no code with the
// routines they check beyond the basic Image/annotation containers.

#include <cstdint>
#include <string>
#include <vector>

#include "textsr/annotation.hpp"
#include "textsr/blur.hpp"
#include "textsr/image.hpp"
#include "textsr/mask.hpp"

namespace textsr::oracle {

// Correlation with explicit mirror indexing, one output sample at a time.
Image direct_filter(const Image& img, const degradation::BlurKernel& kernel);

double direct_psnr(const Image& a, const Image& b);

// Every 11x11 window evaluated on its own with 2-D Gaussian weights.
double direct_ssim(const Image& a, const Image& b);

// Laplacian-variance quality score computed with a 3x3 stencil array and a
// two-pass variance.
double direct_laplacian_score(const Image& img);

// Pixel-centre test against each quad by edge-side signs (convex quads) or
// crossing count.
std::size_t direct_mask_count(const std::vector<TextLineAnnotation>& anns, int width, int height);

// Elementwise: canny on masked images, squared differences summed only on
// mask pixels, RMS over the mask.
double direct_masked_edge_loss(const Image& sr, const Image& hr, const metrics::BinaryMap& mask);

// Exact-match count after NFC + trim, line by line.
std::size_t direct_match_count(const std::vector<std::string>& recognized,
                               const std::vector<std::string>& expected);

struct OracleCrop {
  int x = 0;
  int y = 0;
  std::vector<std::size_t> covered;
};

struct OracleCropPlan {
  bool skipped = false;
  std::vector<OracleCrop> crops;
};

OracleCropPlan direct_crop_plan(const std::vector<TextLineAnnotation>& anns, int width, int height,
                                int crop_size = 512, double max_iou = 0.5);

struct PipelineCounts {
  std::size_t images = 0;
  std::size_t ocr_valid = 0;
  std::size_t skipped_small = 0;
  std::size_t crops = 0;
  std::size_t pass = 0;

  friend bool operator==(const PipelineCounts&, const PipelineCounts&) = default;
};

// Walks a fixture directory (flat; png files with .jsonl sidecars) and
// derives the stage counts with the oracles above.
PipelineCounts direct_pipeline_counts(const std::string& dir, double threshold,
                                      int crop_size = 512);

// Deterministic 32x32 RGB pair #k: a smooth texture and a noisy, shifted
// copy.
std::pair<Image, Image> fixture_pair(int k, int size = 32);

}  // namespace textsr::oracle
