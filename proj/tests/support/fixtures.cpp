#include "fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "textsr/blur.hpp"
#include "textsr/rng.hpp"

namespace textsr::fixtures {
namespace fs = std::filesystem;

Quad axis_quad(double x, double y, double w, double h) {
  return {Point{x, y}, Point{x + w, y}, Point{x + w, y + h}, Point{x, y + h}};
}

Quad rotated_quad(double cx, double cy, double w, double h, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  auto at = [&](double u, double v) { return Point{cx + u * c - v * s, cy + u * s + v * c}; };
  return {at(-w / 2, -h / 2), at(w / 2, -h / 2), at(w / 2, h / 2), at(-w / 2, h / 2)};
}

Image render_scene(const SceneSpec& spec) {
  Rng rng(mix_seed(spec.seed, 0xBACC));
  const double base[3] = {rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.8)};
  const double gx = rng.uniform(-0.2, 0.2) / spec.width, gy = rng.uniform(-0.2, 0.2) / spec.height;
  Image img(spec.height, spec.width, 3);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = base[c] + gx * x + gy * y + spec.noise / 255.0 * rng.normal();

  for (const auto& line : spec.lines) {
    const Quad& q = line.quad;
    // Local frame: u along the top edge, v down the left edge.
    const Point o = q[0];
    const double ux = q[1].x - o.x, uy = q[1].y - o.y;
    const double vx = q[3].x - o.x, vy = q[3].y - o.y;
    const double det = ux * vy - uy * vx;
    if (std::fabs(det) < 1e-9) continue;
    const double len_u = std::hypot(ux, uy), len_v = std::hypot(vx, vy);
    const int glyphs = std::max<int>(1, static_cast<int>(line.transcript.size()));
    const double ink = base[0] > 0.55 ? -spec.contrast : spec.contrast;
    const BoxI box = bounding_box(q, spec.width, spec.height);
    for (int y = box.y0; y < box.y1; ++y)
      for (int x = box.x0; x < box.x1; ++x) {
        const double px = x + 0.5 - o.x, py = y + 0.5 - o.y;
        const double u = (px * vy - py * vx) / det, v = (ux * py - uy * px) / det;
        if (u < 0 || u >= 1 || v < 0 || v >= 1) continue;
        const int g = std::min(glyphs - 1, static_cast<int>(u * glyphs));
        const unsigned code = static_cast<unsigned char>(line.transcript[g % line.transcript.size()]);
        const double gu = u * glyphs - g;  // position inside the glyph cell
        const double stroke_u = 0.14, stroke_v = 0.12 * len_u / glyphs / std::max(1.0, len_v);
        bool on = false;
        if ((code & 1) && gu > 0.15 && gu < 0.15 + stroke_u) on = true;       // left bar
        if ((code & 2) && gu > 0.7 && gu < 0.7 + stroke_u) on = true;         // right bar
        if ((code & 4) && v > 0.15 && v < 0.15 + 2 * stroke_v && gu > 0.15 && gu < 0.85) on = true;
        if ((code & 8) && v > 0.45 && v < 0.45 + 2 * stroke_v && gu > 0.15 && gu < 0.85) on = true;
        if ((code & 16) && v > 0.75 && v < 0.75 + 2 * stroke_v && gu > 0.15 && gu < 0.85) on = true;
        if (!(code & 3) && gu > 0.42 && gu < 0.42 + stroke_u) on = true;      // centre bar
        if (on)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) += ink;
      }
  }
  img = clamp01(std::move(img));
  if (spec.blur_sigma > 0.0) {
    degradation::KernelSpec k;
    k.type = degradation::KernelType::kIsotropic;
    k.size = 2 * static_cast<int>(std::ceil(3 * spec.blur_sigma)) + 1;
    k.sigma_x = k.sigma_y = spec.blur_sigma;
    img = degradation::apply_blur(img, degradation::build_blur_kernel(k));
  }
  return quantize8(img);
}

std::vector<CorpusImage> pipeline_corpus() {
  static const int sizes[10][2] = {{400, 400},  {512, 512}, {640, 600}, {1024, 768}, {2048, 600},
                                   {700, 1100}, {600, 520}, {900, 900}, {1300, 700}, {520, 800}};
  struct Word {
    const char* text;
    Language lang;
  };
  static const Word words[] = {{"OPEN", Language::kEn},        {"EXIT", Language::kEn},
                               {"Coffee Shop", Language::kEn}, {"出口", Language::kZh},
                               {"营业中", Language::kZh},      {"北京路 12号", Language::kZh},
                               {"WiFi免费", Language::kMixed}, {"KTV包厢", Language::kMixed},
                               {"12:30", Language::kOther},    {"#42", Language::kOther}};
  static const char* scenes[] = {"street", "poster", "indoor", "natural", ""};

  std::vector<CorpusImage> corpus;
  Rng rng(20241016);
  for (int i = 0; i < 50; ++i) {
    CorpusImage ci;
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03d.png", i);
    ci.file = name;
    SceneSpec& s = ci.spec;
    s.width = sizes[i % 10][0];
    s.height = sizes[i % 10][1];
    s.seed = 1000 + i;
    s.noise = rng.uniform(1.0, 9.0);
    s.contrast = rng.uniform(0.05, 0.6);
    s.blur_sigma = i % 4 == 0 ? 1.5 : 0.0;
    const char* scene = scenes[rng.uniform_int(0, 4)];

    int lines = static_cast<int>(rng.uniform_int(1, 4));
    if (i % 7 == 3) {
      lines = 0;
      ci.sidecar = false;
    } else if (i % 11 == 5) {
      lines = 0;  // sidecar present but empty
    }
    for (int k = 0; k < lines; ++k) {
      const Word& w = words[rng.uniform_int(0, 9)];
      const double h = rng.uniform(18, 60);
      const double len = std::min<double>(s.width * 0.8, h * 0.8 * (1 + std::string(w.text).size()));
      const double cx = rng.uniform(len / 2, s.width - len / 2);
      const double cy = rng.uniform(h, s.height - h);
      LineSpec line;
      line.transcript = w.text;
      line.language = w.lang;
      line.scene = scene;
      line.quad = rng.bernoulli(0.3) ? rotated_quad(cx, cy, len, h, rng.uniform(-0.4, 0.4))
                                     : axis_quad(cx - len / 2, cy - h / 2, len, h);
      s.lines.push_back(line);
    }
    if (i == 13) {
      // overhangs the right border; ingest clamps it
      LineSpec line{axis_quad(s.width - 60, 40, 120, 30), "EDGE", Language::kEn, "street"};
      s.lines.push_back(line);
    }
    corpus.push_back(std::move(ci));
  }
  return corpus;
}

void write_corpus(const std::string& dir, const std::vector<CorpusImage>& corpus) {
  fs::create_directories(dir);
  for (const auto& ci : corpus) {
    const fs::path img_path = fs::path(dir) / ci.file;
    write_png(img_path.string(), render_scene(ci.spec));
    if (!ci.sidecar) continue;
    fs::path side = img_path;
    side.replace_extension(".jsonl");
    std::ofstream out(side);
    for (const auto& l : ci.spec.lines) {
      TextLineAnnotation a{l.quad, l.transcript, l.language, std::nullopt};
      if (!l.scene.empty()) a.scene = l.scene;
      out << nlohmann::json(a).dump() << "\n";
    }
  }
}

std::string temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("textsr_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace textsr::fixtures
