#include "textsr/ocr_eval.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <exception>
#include <fstream>

#include <nlohmann/json.hpp>

#include "textsr/error.hpp"
#include "textsr/parallel.hpp"
#include "textsr/quality_metrics.hpp"

namespace textsr::metrics {

std::string normalize_transcript(const std::string& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(text);
  // fromUTF8 maps bad sequences to U+FFFD; reject rather than compare those.
  if (src.indexOf(static_cast<UChar32>(0xFFFD)) >= 0 &&
      text.find("\xEF\xBF\xBD") == std::string::npos) {
    throw FormatError("transcript is not valid UTF-8");
  }
  icu::UnicodeString out = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");

  int32_t begin = 0, end = out.length();
  while (begin < end && u_isUWhiteSpace(out.char32At(begin))) begin = out.moveIndex32(begin, 1);
  while (end > begin) {
    const int32_t prev = out.moveIndex32(end, -1);
    if (!u_isUWhiteSpace(out.char32At(prev))) break;
    end = prev;
  }
  std::string result;
  out.tempSubStringBetween(begin, end).toUTF8String(result);
  return result;
}

bool transcripts_match(const std::string& recognized, const std::string& expected) {
  return normalize_transcript(recognized) == normalize_transcript(expected);
}

std::string ReferenceMatchRecognizer::recognize(const LineQuery& q) const {
  if (!q.reference) throw ProviderError("no reference image for " + q.image_id);
  return psnr(q.crop, *q.reference) >= min_psnr_ ? q.annotation.transcript : std::string();
}

PredictionTableRecognizer PredictionTableRecognizer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction table " + path);
  std::map<Key, std::string> table;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      table[{j.at("image").get<std::string>(), j.at("line").get<std::size_t>()}] =
          j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return PredictionTableRecognizer(std::move(table));
}

std::string PredictionTableRecognizer::recognize(const LineQuery& q) const {
  const auto it = table_.find({q.image_id, q.line_index});
  if (it == table_.end()) {
    throw ProviderError("no prediction for " + q.image_id + " line " + std::to_string(q.line_index));
  }
  return it->second;
}

std::vector<OcrLineOutcome> ocr_lines(const OcrSample& sample, const TextRecognizer& recognizer) {
  std::vector<OcrLineOutcome> out;
  out.reserve(sample.annotations.size());
  for (std::size_t i = 0; i < sample.annotations.size(); ++i) {
    const auto& ann = sample.annotations[i];
    OcrLineOutcome o{sample.image_id, i, ann.transcript, {}, false, {}};
    const BoxI box = bounding_box(ann.quad, sample.sr.width, sample.sr.height);
    if (box.empty()) {
      o.error = "line box lies outside the image";
      out.push_back(std::move(o));
      continue;
    }
    try {
      const Image line_crop = crop(sample.sr, box.x0, box.y0, box.width(), box.height());
      Image ref;
      if (!sample.hr.empty()) {
        require_same_dims(sample.sr, sample.hr, "ocr reference");
        ref = crop(sample.hr, box.x0, box.y0, box.width(), box.height());
      }
      o.recognized = recognizer.recognize(
          {sample.image_id, i, ann, line_crop, box, ref.empty() ? nullptr : &ref});
      o.correct = transcripts_match(o.recognized, o.expected);
    } catch (const std::exception& e) {
      o.error = recognizer.name() + ": " + e.what();
      o.correct = false;
    }
    out.push_back(std::move(o));
  }
  return out;
}

OcrResult ocr_accuracy(const std::vector<OcrSample>& samples, const TextRecognizer& recognizer,
                       int jobs) {
  std::vector<std::vector<OcrLineOutcome>> per(samples.size());
  parallel_for(samples.size(), jobs,
               [&](std::size_t i) { per[i] = ocr_lines(samples[i], recognizer); });
  OcrResult r;
  for (auto& lines : per)
    for (auto& l : lines) {
      r.correct += l.correct ? 1 : 0;
      ++r.total;
      r.lines.push_back(std::move(l));
    }
  return r;
}

}  // namespace textsr::metrics
