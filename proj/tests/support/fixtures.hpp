#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textsr/annotation.hpp"
#include "textsr/image.hpp"

namespace textsr::fixtures {

struct LineSpec {
  Quad quad;
  std::string transcript;
  Language language = Language::kEn;
  std::string scene;  // empty: untagged
};

struct SceneSpec {
  int width = 512;
  int height = 512;
  std::vector<LineSpec> lines;
  double noise = 2.0;       // background noise std on the 0..255 scale
  double contrast = 0.7;    // ink vs background
  double blur_sigma = 0.0;  // 0: sharp
  std::uint64_t seed = 1;
};

// Smooth background, glyph-like strokes inside each quad, optional blur.
Image render_scene(const SceneSpec& spec);

Quad axis_quad(double x, double y, double w, double h);
Quad rotated_quad(double cx, double cy, double w, double h, double angle);

struct CorpusImage {
  std::string file;  // relative name, e.g. "img_007.png"
  SceneSpec spec;
  bool sidecar = true;
};

// The 50-image pipeline fixture: mixed sizes (some below 512), images
// without annotations, an empty sidecar, a line overhanging the border,
// blurred and noisy variants.
std::vector<CorpusImage> pipeline_corpus();

// Writes PNGs plus .jsonl sidecars into `dir` (created if needed).
void write_corpus(const std::string& dir, const std::vector<CorpusImage>& corpus);

// Unique scratch directory under the system temp dir.
std::string temp_dir(const std::string& tag);

}  // namespace textsr::fixtures
