#include <doctest.h>

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "textsr/canny.hpp"
#include "textsr/error.hpp"
#include "textsr/eval_report.hpp"
#include "textsr/losses.hpp"
#include "textsr/mask.hpp"
#include "textsr/ocr_eval.hpp"
#include "textsr/quality_metrics.hpp"
#include "textsr/rng.hpp"

using namespace textsr;
using namespace textsr::metrics;

namespace {

TextLineAnnotation line(Quad q, std::string text = "x") {
  return {q, std::move(text), Language::kEn, std::nullopt};
}

Image random_image(int h, int w, int c, std::uint64_t seed) {
  Image img(h, w, c);
  Rng rng(seed);
  for (auto& v : img.pixels) v = rng.uniform();
  return img;
}

// 8-connected components of set pixels.
int components(const BinaryMap& m) {
  std::vector<int> seen(m.values.size(), 0);
  int n = 0;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(y, x) || seen[y * m.width + x]) continue;
      ++n;
      std::deque<std::pair<int, int>> q{{y, x}};
      seen[y * m.width + x] = 1;
      while (!q.empty()) {
        auto [cy, cx] = q.front();
        q.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || nx < 0 || ny >= m.height || nx >= m.width) continue;
            if (!m.at(ny, nx) || seen[ny * m.width + nx]) continue;
            seen[ny * m.width + nx] = 1;
            q.emplace_back(ny, nx);
          }
      }
    }
  return n;
}

class ConstPerceptual : public PerceptualDistanceProvider {
 public:
  explicit ConstPerceptual(double v) : v_(v) {}
  std::string name() const override { return "const"; }
  double distance(const Image& a, const Image& b) const override { return a == b ? 0.0 : v_; }

 private:
  double v_;
};

class ThresholdEdges : public EdgeMapProvider {
 public:
  std::string name() const override { return "threshold"; }
  BinaryMap edges(const Image& img) const override {
    const Image g = to_gray(img);
    BinaryMap m(g.height, g.width);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) m.values[i] = g.pixels[i] >= 0.5;
    return m;
  }
};

class BrokenDestylization : public DestylizationProvider {
 public:
  std::string name() const override { return "broken-odm"; }
  Tensor features(const Image&) const override { throw Error("weights missing"); }
};

BinaryMap full_mask(int h, int w) {
  BinaryMap m(h, w);
  std::fill(m.values.begin(), m.values.end(), 1);
  return m;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr examples") {
  const Image a = random_image(8, 8, 3, 1);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(std::fabs(psnr(Image(4, 4, 3, 0.0), Image(4, 4, 3, 0.1)) - 20.0) < 1e-12);
  CHECK_THROWS_AS(psnr(Image(4, 4, 3), Image(4, 5, 3)), ShapeError);
}

TEST_CASE("psnr and ssim match the direct oracles and are symmetric") {
  for (int k = 0; k < 10; ++k) {
    const auto [a, b] = oracle::fixture_pair(k);
    CHECK(std::fabs(psnr(a, b) - oracle::direct_psnr(a, b)) <= 1e-9);
    CHECK(std::fabs(ssim(a, b) - oracle::direct_ssim(a, b)) <= 1e-6);
    CHECK(psnr(a, b) == psnr(b, a));
    CHECK(std::fabs(ssim(a, b) - ssim(b, a)) < 1e-15);
  }
  const auto [a, b] = oracle::fixture_pair(3, 64);
  CHECK(std::fabs(ssim(a, b) - oracle::direct_ssim(a, b)) <= 1e-6);
}

TEST_CASE("ssim examples") {
  const Image a = random_image(32, 32, 3, 2);
  CHECK(std::fabs(ssim(a, a) - 1.0) < 1e-12);
  Image neg = a;
  for (auto& v : neg.pixels) v = 1.0 - v;
  CHECK(ssim(a, neg) < 0.0);
  CHECK_THROWS_AS(ssim(Image(10, 32, 3), Image(10, 32, 3)), ParameterError);
}

TEST_CASE("mask counts") {
  CHECK(rasterize_text_mask({line(fixtures::axis_quad(3, 5, 10, 4))}, 30, 30).pixels.count() == 40);
  const auto two = rasterize_text_mask(
      {line(fixtures::axis_quad(0, 0, 10, 4)), line(fixtures::axis_quad(15, 15, 5, 6))}, 30, 30);
  CHECK(two.pixels.count() == 70);
  CHECK(two.provenance == std::vector<std::size_t>{0, 1});
  const auto overlap = rasterize_text_mask(
      {line(fixtures::axis_quad(0, 0, 10, 10)), line(fixtures::axis_quad(5, 5, 10, 10))}, 30, 30);
  CHECK(overlap.pixels.count() == 175);
}

TEST_CASE("rotated square stays within the perimeter bound") {
  for (double angle : {0.1, 0.3, 0.5, 0.785}) {
    const double s = 20.0;
    const auto m = rasterize_text_mask({line(fixtures::rotated_quad(32.3, 31.7, s, s, angle))}, 64, 64);
    CHECK(std::fabs(static_cast<double>(m.pixels.count()) - s * s) <= 2 * 4 * s);
  }
}

TEST_CASE("mask agrees with the winding-number oracle") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<TextLineAnnotation> anns;
    for (int k = 0; k < 3; ++k)
      anns.push_back(line(fixtures::rotated_quad(rng.uniform(0, 60), rng.uniform(0, 50),
                                                 rng.uniform(4, 40), rng.uniform(3, 15),
                                                 rng.uniform(-1, 1))));
    CHECK(rasterize_text_mask(anns, 60, 50).pixels.count() == oracle::direct_mask_count(anns, 60, 50));
  }
}

TEST_CASE("degenerate and out-of-bounds quads") {
  const Quad flat{Point{1, 1}, Point{9, 1}, Point{9, 1}, Point{1, 1}};
  const auto m = rasterize_text_mask({line(flat), line(fixtures::axis_quad(25, 25, 20, 20))}, 30, 30);
  CHECK(m.pixels.count() == 25);
  CHECK(m.warnings.size() >= 2);  // one skip, one clamp
  CHECK(m.provenance == std::vector<std::size_t>{1});
}

TEST_CASE("canny: constant image has no edges") {
  CHECK(canny_edges(Image(32, 32, 3, 0.6)).count() == 0);
}

TEST_CASE("canny: vertical step gives one thin contiguous line") {
  Image step(32, 32, 1, 0.0);
  for (int y = 0; y < 32; ++y)
    for (int x = 16; x < 32; ++x) step.at(y, x, 0) = 1.0;
  const auto e = canny_edges(step);
  for (int y = 0; y < 32; ++y) {
    int n = 0, col = -1;
    for (int x = 0; x < 32; ++x)
      if (e.at(y, x)) ++n, col = x;
    CHECK(n == 1);
    CHECK((col == 15 || col == 16));
  }
  CHECK(components(e) == 1);
}

TEST_CASE("canny: square outline forms a closed loop") {
  Image sq(48, 48, 1, 0.0);
  for (int y = 14; y < 34; ++y)
    for (int x = 14; x < 34; ++x) sq.at(y, x, 0) = 1.0;
  const auto e = canny_edges(sq);
  CHECK(components(e) == 1);
  // the loop separates the centre from the border: 4-connected flood fill
  // from the centre over non-edge pixels never reaches the image border
  std::vector<int> seen(48 * 48, 0);
  std::deque<std::pair<int, int>> q{{24, 24}};
  seen[24 * 48 + 24] = 1;
  bool escaped = false;
  while (!q.empty()) {
    auto [y, x] = q.front();
    q.pop_front();
    if (y == 0 || x == 0 || y == 47 || x == 47) escaped = true;
    const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& s : d) {
      const int ny = y + s[0], nx = x + s[1];
      if (ny < 0 || nx < 0 || ny >= 48 || nx >= 48 || seen[ny * 48 + nx] || e.at(ny, nx)) continue;
      seen[ny * 48 + nx] = 1;
      q.emplace_back(ny, nx);
    }
  }
  CHECK_FALSE(escaped);
  // every edge pixel sits on the square boundary (within one pixel)
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      if (e.at(y, x)) {
        const bool near_x = std::abs(x - 13) <= 1 || std::abs(x - 33) <= 1;
        const bool near_y = std::abs(y - 13) <= 1 || std::abs(y - 33) <= 1;
        CHECK((near_x || near_y));
      }
}

TEST_CASE("canny output is binary and thresholds are validated") {
  const auto e = canny_edges(random_image(24, 24, 3, 3));
  for (auto v : e.values) CHECK((v == 0 || v == 1));
  CHECK_THROWS_AS(canny_edges(Image(16, 16, 1), {0.2, 0.1}), ParameterError);
  CHECK_THROWS_AS(canny_edges(Image(16, 16, 1), {0.0, 0.1}), ParameterError);
}

TEST_CASE("masked edge loss: identity, locality, stroke erasure vs oracle") {
  fixtures::SceneSpec s;
  s.width = 96;
  s.height = 64;
  s.noise = 0.0;
  s.contrast = 0.6;
  s.lines.push_back({fixtures::axis_quad(10, 20, 60, 24), "OPEN", Language::kEn, ""});
  const Image hr = fixtures::render_scene(s);
  const auto mask = rasterize_text_mask({line(s.lines[0].quad)}, 96, 64).pixels;
  CHECK(masked_edge_loss(hr, hr, mask) == 0.0);

  Image outside = hr;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 96; ++x)
      if (!mask.at(y, x))
        for (int c = 0; c < 3; ++c) outside.at(y, x, c) = 1.0 - outside.at(y, x, c);
  CHECK(masked_edge_loss(outside, hr, mask) == 0.0);

  // erase the glyph strokes: paint the mask interior with the background
  Image erased = hr;
  for (int y = 20; y < 44; ++y)
    for (int x = 10; x < 70; ++x)
      for (int c = 0; c < 3; ++c) erased.at(y, x, c) = hr.at(18, x, c);
  const double loss = masked_edge_loss(erased, hr, mask);
  CHECK(loss > 0.0);
  CHECK(std::fabs(loss - oracle::direct_masked_edge_loss(erased, hr, mask)) < 1e-12);
  CHECK(masked_edge_loss(erased, hr, BinaryMap(64, 96)) == 0.0);
  CHECK_THROWS_AS(masked_edge_loss(erased, hr, BinaryMap(64, 95)), ShapeError);
}

TEST_CASE("total loss: stubs force unit components, total 14") {
  const Image sr(16, 16, 3, 1.0), hr(16, 16, 3, 0.0);
  const ConstPerceptual perc(1.0);
  const IdentityDestylization odm;
  const ThresholdEdges edges;
  const auto c = total_loss(sr, hr, full_mask(16, 16), {perc, odm, edges});
  CHECK(c.pixel == 1.0);
  CHECK(c.perceptual == 1.0);
  CHECK(c.edge == 1.0);
  CHECK(c.odm == 1.0);
  CHECK(c.total == 14.0);
}

TEST_CASE("total loss: sr == hr gives zeros with default providers") {
  const Image img = random_image(32, 32, 3, 4);
  const auto c = total_loss(img, img, full_mask(32, 32), default_loss_providers());
  CHECK(c.pixel == 0.0);
  CHECK(c.perceptual == 0.0);
  CHECK(c.edge == 0.0);
  CHECK(c.odm == 0.0);
  CHECK(c.total == 0.0);
}

TEST_CASE("total loss is the weighted sum and linear in the weights") {
  const auto [a, b] = oracle::fixture_pair(2);
  const auto mask = rasterize_text_mask({line(fixtures::axis_quad(4, 6, 20, 12))}, 32, 32).pixels;
  const auto prov = default_loss_providers();
  const LossWeights w;
  const auto c = total_loss(a, b, mask, prov, w);
  CHECK(std::fabs(c.total - (c.pixel + 2 * c.perceptual + c.edge + 10 * c.odm)) <= 1e-12);
  CHECK(std::fabs(c.pixel - pixel_loss(a, b)) == 0.0);
  CHECK(std::fabs(c.perceptual - prov.perceptual.distance(a, b)) == 0.0);
  CHECK(std::fabs(c.odm - masked_feature_loss(a, b, mask, prov.destylization)) == 0.0);
  for (int i = 0; i < 4; ++i) {
    LossWeights z = w;
    double* f[4] = {&z.pixel, &z.perceptual, &z.edge, &z.odm};
    const double comp[4] = {c.pixel, c.perceptual, c.edge, c.odm};
    *f[i] = 0.0;
    CHECK(std::fabs(total_loss(a, b, mask, prov, z).total - (c.total - comp[i] * (i == 0 ? 1 : i == 1 ? 2 : i == 2 ? 1 : 10))) <= 1e-12);
    *f[i] = 3.5;
    const double base = total_loss(a, b, mask, prov, z).total;
    *f[i] = 7.0;
    CHECK(std::fabs(total_loss(a, b, mask, prov, z).total - base - 3.5 * comp[i]) <= 1e-12);
  }
}

TEST_CASE("provider failure names the provider") {
  const ConstPerceptual perc(1.0);
  const BrokenDestylization odm;
  const CannyEdgeProvider edges;
  try {
    (void)total_loss(Image(16, 16, 3, 0.2), Image(16, 16, 3, 0.3), full_mask(16, 16), {perc, odm, edges});
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(std::string(e.what()).find("broken-odm") != std::string::npos);
  }
}

TEST_CASE("transcript normalization") {
  CHECK(transcripts_match("Text", "Text"));
  CHECK_FALSE(transcripts_match("Text", "text"));
  CHECK(transcripts_match("  出口\t", "出口"));
  CHECK(transcripts_match("　OPEN\n", "OPEN"));
  CHECK(transcripts_match("café", "café"));
  CHECK_FALSE(transcripts_match("Coffee  Shop", "Coffee Shop"));
  CHECK_THROWS_AS(normalize_transcript(std::string("\xff\xfe", 2)), FormatError);
}

TEST_CASE("OCR-A counting: 2 of 4 and all correct") {
  const std::vector<std::string> expected{"Text", "OPEN", "出口", "42"};
  const std::vector<std::string> recognized{"text", "OPEN", "出口 ", "4Z"};
  OcrSample sample{"img", Image(64, 64, 3, 0.5), {}, {}};
  for (int i = 0; i < 4; ++i)
    sample.annotations.push_back(line(fixtures::axis_quad(4, 4 + 14 * i, 40, 10), expected[i]));
  const FunctionRecognizer rec("table", [&](const LineQuery& q) { return recognized[q.line_index]; });
  const auto r = ocr_accuracy({sample}, rec);
  CHECK(r.correct == 2);
  CHECK(r.correct == oracle::direct_match_count(recognized, expected));
  CHECK(r.accuracy() == 0.5);
  CHECK(ocr_accuracy({sample}, TranscriptOracleRecognizer{}).accuracy() == 1.0);
  CHECK(ocr_accuracy({}, rec).accuracy() == 0.0);
}

TEST_CASE("OCR crops the bounding box and pools lines across images") {
  std::vector<OcrSample> samples;
  for (int i = 0; i < 3; ++i) {
    OcrSample s{"img" + std::to_string(i), random_image(40, 50, 3, 10 + i), {}, {}};
    for (int k = 0; k <= i; ++k)
      s.annotations.push_back(line(fixtures::rotated_quad(25, 20, 20, 8, 0.3), "L" + std::to_string(k)));
    samples.push_back(std::move(s));
  }
  // correct only on the first line of each image: 3 of 6 lines
  const FunctionRecognizer rec("first", [](const LineQuery& q) {
    CHECK(q.crop.width == q.box.width());
    CHECK(q.crop.height == q.box.height());
    return q.line_index == 0 ? q.annotation.transcript : std::string("?");
  });
  const auto r = ocr_accuracy(samples, rec, 3);
  CHECK(r.total == 6);
  CHECK(r.correct == 3);
  CHECK(r.accuracy() == 0.5);
}

TEST_CASE("recognizer failure counts the line as incorrect") {
  OcrSample s{"img", Image(32, 32, 3, 0.5), {line(fixtures::axis_quad(2, 2, 10, 5), "A"),
                                              line(fixtures::axis_quad(2, 12, 10, 5), "B")}, {}};
  const FunctionRecognizer rec("flaky", [](const LineQuery& q) -> std::string {
    if (q.line_index == 1) throw Error("engine crashed");
    return q.annotation.transcript;
  });
  const auto r = ocr_accuracy({s}, rec);
  CHECK(r.correct == 1);
  CHECK(r.total == 2);
  CHECK(r.lines[1].error.find("engine crashed") != std::string::npos);
  CHECK_FALSE(r.lines[1].correct);
}

TEST_CASE("reference-match recognizer reads lines only where SR is close to HR") {
  const Image hr = random_image(40, 40, 3, 21);
  Image sr = hr;
  for (int y = 20; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      for (int c = 0; c < 3; ++c) sr.at(y, x, c) = 1.0 - sr.at(y, x, c);
  OcrSample s{"img", sr, {line(fixtures::axis_quad(2, 2, 30, 10), "top"),
                          line(fixtures::axis_quad(2, 25, 30, 10), "bottom")}, hr};
  const auto r = ocr_accuracy({s}, ReferenceMatchRecognizer(30.0));
  CHECK(r.lines[0].correct);
  CHECK_FALSE(r.lines[1].correct);
  s.hr = Image();
  CHECK(ocr_accuracy({s}, ReferenceMatchRecognizer(30.0)).correct == 0);
}

TEST_CASE("prediction table recognizer loads JSONL") {
  const auto dir = fixtures::temp_dir("pred");
  const auto path = dir + "/pred.jsonl";
  std::ofstream(path) << "{\"image\": \"a\", \"line\": 0, \"text\": \"OPEN\"}\n\n"
                      << "{\"image\": \"a\", \"line\": 1, \"text\": \"exit\"}\n";
  const auto rec = PredictionTableRecognizer::load(path);
  OcrSample s{"a", Image(32, 32, 3, 0.5), {line(fixtures::axis_quad(1, 1, 9, 5), "OPEN"),
                                            line(fixtures::axis_quad(1, 9, 9, 5), "EXIT"),
                                            line(fixtures::axis_quad(1, 18, 9, 5), "X")}, {}};
  const auto r = ocr_accuracy({s}, rec);
  CHECK(r.correct == 1);
  CHECK_FALSE(r.lines[2].error.empty());
  std::ofstream(path) << "{\"image\": \"a\", \"line\": \n";
  CHECK_THROWS_AS(PredictionTableRecognizer::load(path), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("eval report aggregates per-image means and pools OCR lines") {
  const auto dir = fixtures::temp_dir("eval");
  std::vector<EvalItem> items;
  for (int i = 0; i < 3; ++i) {
    const auto [a, b] = oracle::fixture_pair(i);
    const std::string hr = dir + "/hr" + std::to_string(i) + ".png";
    const std::string sr = dir + "/sr" + std::to_string(i) + ".png";
    write_png(hr, a);
    write_png(sr, i == 0 ? a : b);
    items.push_back({"p" + std::to_string(i), hr, sr,
                     {line(fixtures::axis_quad(2, 2, 20, 8), "AB"), line(fixtures::axis_quad(2, 14, 20, 8), "CD")}});
  }
  items.push_back({"missing", dir + "/hr0.png", dir + "/nope.png", {}});
  const auto report = evaluate(items, ReferenceMatchRecognizer(30.0), default_loss_providers(), LossWeights{}, 2);
  CHECK(report.aggregate.images == 3);
  CHECK(report.aggregate.failed == 1);
  CHECK_FALSE(report.images[3].ok);
  double mean_psnr = 0;
  for (int i = 0; i < 3; ++i) mean_psnr += report.images[i].psnr / 3.0;
  CHECK(std::fabs(report.aggregate.psnr - mean_psnr) < 1e-12);
  CHECK(report.images[0].psnr == kPsnrCap);
  CHECK(report.aggregate.ocr_total == 6);
  CHECK(report.aggregate.ocr_accuracy >= 0.0);
  CHECK(report.aggregate.ocr_accuracy <= 1.0);
  const auto j = to_json(report);
  CHECK(j["config"]["lambda4"] == 10.0);
  const auto table = format_table(report);
  CHECK(table.find("OCR-A") < table.find("PSNR"));
  CHECK(table.find("PSNR") < table.find("SSIM"));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
