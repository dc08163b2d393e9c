#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textsr/annotation.hpp"
#include "textsr/losses.hpp"
#include "textsr/ocr_eval.hpp"

namespace textsr::metrics {

struct EvalItem {
  std::string id;
  std::string hr_path;
  std::string sr_path;
  std::vector<TextLineAnnotation> annotations;
};

struct ImageEval {
  std::string id;
  bool ok = false;
  std::string error;  // set when !ok; the image is left out of the means
  std::size_t ocr_correct = 0;
  std::size_t ocr_total = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  LossComponents losses;
};

struct EvalAggregate {
  std::size_t images = 0;  // successfully evaluated
  std::size_t failed = 0;
  std::size_t ocr_correct = 0;
  std::size_t ocr_total = 0;
  double ocr_accuracy = 0.0;  // pooled over lines
  double psnr = 0.0;
  double ssim = 0.0;
  LossComponents losses;
};

struct EvalReport {
  std::vector<ImageEval> images;
  std::vector<OcrLineOutcome> lines;
  EvalAggregate aggregate;
  LossWeights weights;
  std::string recognizer;
  std::string perceptual_provider;
  std::string destylization_provider;
  std::string edge_provider;
};

// Evaluates one SR/HR pair already in memory.
ImageEval evaluate_image(const std::string& id, const Image& sr, const Image& hr,
                         const std::vector<TextLineAnnotation>& annotations,
                         const TextRecognizer& recognizer, const LossProviders& providers,
                         const LossWeights& weights, std::vector<OcrLineOutcome>* lines = nullptr);

EvalAggregate aggregate(const std::vector<ImageEval>& images);

// Loads each pair, evaluates in parallel, reduces in item order.
EvalReport evaluate(const std::vector<EvalItem>& items, const TextRecognizer& recognizer,
                    const LossProviders& providers, const LossWeights& weights, int jobs = 1);

nlohmann::json to_json(const EvalReport& report);

// Aligned plain-text table: OCR-A, PSNR, SSIM, then the loss terms.
std::string format_table(const EvalReport& report);

}  // namespace textsr::metrics
