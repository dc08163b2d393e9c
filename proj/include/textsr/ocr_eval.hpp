#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "textsr/annotation.hpp"
#include "textsr/image.hpp"

namespace textsr::metrics {

// NFC normalization followed by stripping leading/trailing Unicode
// whitespace. Throws FormatError on invalid UTF-8.
std::string normalize_transcript(const std::string& text);

// Exact comparison after normalize_transcript on both sides. Case matters.
bool transcripts_match(const std::string& recognized, const std::string& expected);

struct LineQuery {
  const std::string& image_id;
  std::size_t line_index;
  const TextLineAnnotation& annotation;
  const Image& crop;  // axis-aligned bounding box of the quad, cut from the SR image
  BoxI box;
  const Image* reference;  // matching HR crop when the caller has one, else null
};

// Implementations are called concurrently from several threads.
class TextRecognizer {
 public:
  virtual ~TextRecognizer() = default;
  virtual std::string name() const = 0;
  virtual std::string recognize(const LineQuery& query) const = 0;
};

// Returns the ground-truth transcript: the self-comparison stub.
class TranscriptOracleRecognizer : public TextRecognizer {
 public:
  std::string name() const override { return "transcript-oracle"; }
  std::string recognize(const LineQuery& q) const override { return q.annotation.transcript; }
};

// Reads the line correctly iff the SR crop has PSNR >= `min_psnr` dB against
// the HR crop of the same box; otherwise returns "".
class ReferenceMatchRecognizer : public TextRecognizer {
 public:
  explicit ReferenceMatchRecognizer(double min_psnr = 30.0) : min_psnr_(min_psnr) {}
  std::string name() const override { return "reference-match"; }
  std::string recognize(const LineQuery& q) const override;

 private:
  double min_psnr_;
};

// Precomputed predictions, e.g. from an external OCR engine. JSONL rows of
// {"image": id, "line": k, "text": "..."}.
class PredictionTableRecognizer : public TextRecognizer {
 public:
  using Key = std::pair<std::string, std::size_t>;
  explicit PredictionTableRecognizer(std::map<Key, std::string> table)
      : table_(std::move(table)) {}
  static PredictionTableRecognizer load(const std::string& path);
  std::string name() const override { return "prediction-table"; }
  std::string recognize(const LineQuery& q) const override;

 private:
  std::map<Key, std::string> table_;
};

class FunctionRecognizer : public TextRecognizer {
 public:
  using Fn = std::function<std::string(const LineQuery&)>;
  FunctionRecognizer(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  std::string recognize(const LineQuery& q) const override { return fn_(q); }

 private:
  std::string name_;
  Fn fn_;
};

struct OcrSample {
  std::string image_id;
  Image sr;
  std::vector<TextLineAnnotation> annotations;
  Image hr;  // optional; empty when unavailable
};

struct OcrLineOutcome {
  std::string image_id;
  std::size_t line_index = 0;
  std::string expected;
  std::string recognized;
  bool correct = false;
  std::string error;  // recognizer failure; such lines count as incorrect
};

struct OcrResult {
  std::vector<OcrLineOutcome> lines;
  std::size_t correct = 0;
  std::size_t total = 0;
  // Lines pooled over every image. 0 when there are no lines.
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

std::vector<OcrLineOutcome> ocr_lines(const OcrSample& sample, const TextRecognizer& recognizer);

OcrResult ocr_accuracy(const std::vector<OcrSample>& samples, const TextRecognizer& recognizer,
                       int jobs = 1);

}  // namespace textsr::metrics
