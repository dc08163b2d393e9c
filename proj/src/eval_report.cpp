#include "textsr/eval_report.hpp"

#include <cstdio>
#include <exception>
#include <sstream>

#include "textsr/error.hpp"
#include "textsr/parallel.hpp"
#include "textsr/quality_metrics.hpp"

namespace textsr::metrics {
namespace {

nlohmann::json losses_json(const LossComponents& c) {
  return {{"l_diff", c.pixel},
          {"l_perceptual", c.perceptual},
          {"l_edge", c.edge},
          {"l_odm", c.odm},
          {"l_total", c.total}};
}

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

ImageEval evaluate_image(const std::string& id, const Image& sr, const Image& hr,
                         const std::vector<TextLineAnnotation>& annotations,
                         const TextRecognizer& recognizer, const LossProviders& providers,
                         const LossWeights& weights, std::vector<OcrLineOutcome>* lines) {
  require_same_dims(sr, hr, "evaluate");
  ImageEval e;
  e.id = id;
  auto outcomes = ocr_lines({id, sr, annotations, hr}, recognizer);
  for (const auto& o : outcomes) e.ocr_correct += o.correct ? 1 : 0;
  e.ocr_total = outcomes.size();
  e.psnr = psnr(sr, hr);
  e.ssim = ssim(sr, hr);
  const TextMask mask = rasterize_text_mask(annotations, hr.width, hr.height);
  e.losses = total_loss(sr, hr, mask.pixels, providers, weights);
  e.ok = true;
  if (lines) *lines = std::move(outcomes);
  return e;
}

EvalAggregate aggregate(const std::vector<ImageEval>& images) {
  EvalAggregate a;
  for (const auto& e : images) {
    if (!e.ok) {
      ++a.failed;
      continue;
    }
    ++a.images;
    a.ocr_correct += e.ocr_correct;
    a.ocr_total += e.ocr_total;
    a.psnr += e.psnr;
    a.ssim += e.ssim;
    a.losses.pixel += e.losses.pixel;
    a.losses.perceptual += e.losses.perceptual;
    a.losses.edge += e.losses.edge;
    a.losses.odm += e.losses.odm;
    a.losses.total += e.losses.total;
  }
  if (a.images) {
    const double n = static_cast<double>(a.images);
    a.psnr /= n;
    a.ssim /= n;
    a.losses.pixel /= n;
    a.losses.perceptual /= n;
    a.losses.edge /= n;
    a.losses.odm /= n;
    a.losses.total /= n;
  }
  a.ocr_accuracy = a.ocr_total ? static_cast<double>(a.ocr_correct) / a.ocr_total : 0.0;
  return a;
}

EvalReport evaluate(const std::vector<EvalItem>& items, const TextRecognizer& recognizer,
                    const LossProviders& providers, const LossWeights& weights, int jobs) {
  EvalReport r;
  r.weights = weights;
  r.recognizer = recognizer.name();
  r.perceptual_provider = providers.perceptual.name();
  r.destylization_provider = providers.destylization.name();
  r.edge_provider = providers.edge.name();
  r.images.resize(items.size());
  std::vector<std::vector<OcrLineOutcome>> lines(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& item = items[i];
    try {
      const Image hr = read_image(item.hr_path);
      const Image sr = read_image(item.sr_path);
      r.images[i] = evaluate_image(item.id, sr, hr, item.annotations, recognizer, providers,
                                   weights, &lines[i]);
    } catch (const std::exception& e) {
      r.images[i].id = item.id;
      r.images[i].ok = false;
      r.images[i].error = e.what();
    }
  });
  for (auto& l : lines)
    for (auto& o : l) r.lines.push_back(std::move(o));
  r.aggregate = aggregate(r.images);
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& e : r.images) {
    nlohmann::json j = {{"id", e.id}, {"ok", e.ok}};
    if (e.ok) {
      j["ocr_correct"] = e.ocr_correct;
      j["ocr_total"] = e.ocr_total;
      j["psnr"] = e.psnr;
      j["ssim"] = e.ssim;
      j.update(losses_json(e.losses));
    } else {
      j["error"] = e.error;
    }
    images.push_back(std::move(j));
  }
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& o : r.lines) {
    nlohmann::json j = {{"image", o.image_id},
                        {"line", o.line_index},
                        {"expected", o.expected},
                        {"recognized", o.recognized},
                        {"correct", o.correct}};
    if (!o.error.empty()) j["error"] = o.error;
    lines.push_back(std::move(j));
  }
  const auto& a = r.aggregate;
  nlohmann::json agg = {{"images", a.images},   {"failed", a.failed},
                        {"ocr_correct", a.ocr_correct}, {"ocr_total", a.ocr_total},
                        {"ocr_accuracy", a.ocr_accuracy}, {"psnr", a.psnr},
                        {"ssim", a.ssim}};
  agg.update(losses_json(a.losses));
  return {{"config",
           {{"lambda1", r.weights.pixel},
            {"lambda2", r.weights.perceptual},
            {"lambda3", r.weights.edge},
            {"lambda4", r.weights.odm},
            {"recognizer", r.recognizer},
            {"perceptual_provider", r.perceptual_provider},
            {"destylization_provider", r.destylization_provider},
            {"edge_provider", r.edge_provider}}},
          {"aggregate", agg},
          {"images", images},
          {"lines", lines}};
}

std::string format_table(const EvalReport& r) {
  const auto& a = r.aggregate;
  const std::vector<std::pair<std::string, std::string>> cols = {
      {"OCR-A", fixed(a.ocr_accuracy, 4)}, {"PSNR", fixed(a.psnr, 2)},
      {"SSIM", fixed(a.ssim, 4)},          {"L_diff", fixed(a.losses.pixel, 5)},
      {"L_perc", fixed(a.losses.perceptual, 5)}, {"L_edge", fixed(a.losses.edge, 5)},
      {"L_odm", fixed(a.losses.odm, 5)},   {"L_total", fixed(a.losses.total, 5)}};
  std::ostringstream head, row;
  for (const auto& [name, value] : cols) {
    const std::size_t w = std::max(name.size(), value.size()) + 2;
    head << std::string(w - name.size(), ' ') << name;
    row << std::string(w - value.size(), ' ') << value;
  }
  std::ostringstream out;
  out << head.str() << "\n" << row.str() << "\n";
  out << "images: " << a.images << " evaluated, " << a.failed << " failed; lines "
      << a.ocr_correct << "/" << a.ocr_total << "\n";
  return out.str();
}

}  // namespace textsr::metrics
