#pragma once

#include <optional>
#include <string>
#include <vector>

#include "textsr/annotation.hpp"

namespace textsr::dataset {

struct ImageRecord {
  std::string id;           // sanitized relative stem, unique within a root
  std::string source_path;  // absolute
  int width = 0;
  int height = 0;
  std::vector<TextLineAnnotation> annotations;
  std::optional<double> quality_score;
  bool ocr_valid = false;
};

// Supplies text-line annotations for a source image. The default reads the
// ground-truth sidecar; a real OCR engine would plug in here.
class OcrProvider {
 public:
  virtual ~OcrProvider() = default;
  virtual std::string name() const = 0;
  // May throw FormatError for malformed input (fatal to ingest).
  virtual std::vector<TextLineAnnotation> annotations(const std::string& image_path) const = 0;
};

// `<image stem>.jsonl` beside the image: one annotation object per line,
// {"quad": [x0,y0, x1,y1, x2,y2, x3,y3], "transcript": "...",
//  "language": "zh|en|mixed|other", "scene": "..."?}. Blank lines are
// ignored. A missing sidecar means no annotations.
class SidecarOcrProvider : public OcrProvider {
 public:
  std::string name() const override { return "sidecar"; }
  std::vector<TextLineAnnotation> annotations(const std::string& image_path) const override;
};

std::string sidecar_path(const std::string& image_path);

// Parses sidecar text; errors name `origin` and the 1-based line.
std::vector<TextLineAnnotation> parse_sidecar(const std::string& text, const std::string& origin);
std::string format_sidecar(const std::vector<TextLineAnnotation>& annotations);

struct IngestResult {
  std::vector<ImageRecord> records;
  std::vector<std::string> warnings;
  std::size_t unreadable = 0;
};

// Recursively collects .png/.jpg/.jpeg files under `root` in sorted path
// order. Undecodable images are warned about and skipped; quads are clamped
// to the image and made clockwise; lines that collapse to zero area after
// clamping are dropped with a warning.
IngestResult ingest(const std::string& root, const OcrProvider& ocr);

std::string record_id(const std::string& relative_path);

}  // namespace textsr::dataset
