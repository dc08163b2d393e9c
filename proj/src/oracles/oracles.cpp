#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "textsr/canny.hpp"
#include "textsr/rng.hpp"

namespace textsr::oracle {
namespace fs = std::filesystem;

namespace {

int mirror(int i, int n) {
  // reflect-101 for |overshoot| < n
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

double luma(const Image& img, int y, int x) {
  if (img.channels == 1) return img.at(y, x, 0);
  return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
}

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Winding number of the closed polygon around p.
int winding(const Quad& q, Point p) {
  int wn = 0;
  for (int i = 0; i < 4; ++i) {
    const Point a = q[i], b = q[(i + 1) % 4];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(a, b, p) > 0) ++wn;
    } else {
      if (b.y <= p.y && cross(a, b, p) < 0) --wn;
    }
  }
  return wn;
}

Quad clamped(Quad q, double w, double h) {
  for (auto& p : q) {
    p.x = std::min(std::max(p.x, 0.0), w);
    p.y = std::min(std::max(p.y, 0.0), h);
  }
  return q;
}

// Half the cross product of the diagonals: the area of any simple quad.
double diagonal_area(const Quad& q) {
  const double d1x = q[2].x - q[0].x, d1y = q[2].y - q[0].y;
  const double d2x = q[3].x - q[1].x, d2y = q[3].y - q[1].y;
  return 0.5 * std::fabs(d1x * d2y - d1y * d2x);
}

std::string trim_ascii(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Image direct_filter(const Image& img, const degradation::BlurKernel& k) {
  const int r = k.size / 2;
  Image out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        long double acc = 0.0L;
        for (int i = 0; i < k.size; ++i)
          for (int j = 0; j < k.size; ++j)
            acc += static_cast<long double>(k.weights[i * k.size + j]) *
                   img.at(mirror(y + i - r, img.height), mirror(x + j - r, img.width), c);
        out.at(y, x, c) = static_cast<double>(acc);
      }
  return out;
}

double direct_psnr(const Image& a, const Image& b) {
  long double se = 0.0L;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x)
      for (int c = 0; c < a.channels; ++c) {
        const long double d = static_cast<long double>(a.at(y, x, c)) - b.at(y, x, c);
        se += d * d;
      }
  const long double mse = se / (static_cast<long double>(a.height) * a.width * a.channels);
  if (mse == 0.0L) return 100.0;
  return std::min(100.0, static_cast<double>(-10.0L * std::log10(mse)));
}

double direct_ssim(const Image& a, const Image& b) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  double w[kWin][kWin];
  double total = 0.0;
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) {
      const double di = i - kWin / 2, dj = j - kWin / 2;
      w[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
      total += w[i][j];
    }
  for (auto& row : w)
    for (double& v : row) v /= total;

  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  long double sum = 0.0L;
  int windows = 0;
  for (int y0 = 0; y0 + kWin <= a.height; ++y0)
    for (int x0 = 0; x0 + kWin <= a.width; ++x0) {
      long double mx = 0, my = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          mx += w[i][j] * luma(a, y0 + i, x0 + j);
          my += w[i][j] * luma(b, y0 + i, x0 + j);
        }
      long double vx = 0, vy = 0, cov = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const long double dx = luma(a, y0 + i, x0 + j) - mx;
          const long double dy = luma(b, y0 + i, x0 + j) - my;
          vx += w[i][j] * dx * dx;
          vy += w[i][j] * dy * dy;
          cov += w[i][j] * dx * dy;
        }
      sum += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  return static_cast<double>(sum / windows);
}

double direct_laplacian_score(const Image& img) {
  static const int stencil[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
  std::vector<double> values;
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x = 1; x + 1 < img.width; ++x) {
      double v = 0.0;
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) v += stencil[i + 1][j + 1] * 255.0 * luma(img, y + i, x + j);
      values.push_back(v);
    }
  long double mean = 0.0L;
  for (double v : values) mean += v;
  mean /= values.size();
  long double var = 0.0L;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();
  const double vv = static_cast<double>(var);
  return 1.0 + 4.0 * vv / (vv + 100.0);
}

std::size_t direct_mask_count(const std::vector<TextLineAnnotation>& anns, int width, int height) {
  std::size_t n = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Point p{x + 0.5, y + 0.5};
      for (const auto& a : anns) {
        const Quad q = clamped(a.quad, width, height);
        if (diagonal_area(q) > 0.0 && winding(q, p) != 0) {
          ++n;
          break;
        }
      }
    }
  return n;
}

double direct_masked_edge_loss(const Image& sr, const Image& hr, const metrics::BinaryMap& mask) {
  Image ms = sr, mh = hr;
  std::size_t inside = 0;
  for (int y = 0; y < sr.height; ++y)
    for (int x = 0; x < sr.width; ++x) {
      if (mask.values[y * sr.width + x]) {
        ++inside;
        continue;
      }
      for (int c = 0; c < sr.channels; ++c) ms.at(y, x, c) = mh.at(y, x, c) = 0.0;
    }
  if (inside == 0) return 0.0;
  const auto es = metrics::canny_edges(ms), eh = metrics::canny_edges(mh);
  double se = 0.0;
  for (std::size_t i = 0; i < mask.values.size(); ++i)
    if (mask.values[i]) se += std::pow(double(es.values[i]) - double(eh.values[i]), 2);
  return std::sqrt(se / inside);
}

std::size_t direct_match_count(const std::vector<std::string>& recognized,
                               const std::vector<std::string>& expected) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (i < recognized.size() && trim_ascii(recognized[i]) == trim_ascii(expected[i])) ++n;
  return n;
}

OracleCropPlan direct_crop_plan(const std::vector<TextLineAnnotation>& anns, int width, int height,
                                int size, double max_iou) {
  OracleCropPlan plan;
  if (width < size || height < size) {
    plan.skipped = true;
    return plan;
  }
  const std::size_t n = anns.size();
  std::vector<double> area(n);
  std::vector<Point> center(n);
  for (std::size_t i = 0; i < n; ++i) {
    area[i] = diagonal_area(anns[i].quad);
    double sx = 0, sy = 0;
    for (const auto& p : anns[i].quad) sx += p.x, sy += p.y;
    center[i] = {sx / 4, sy / 4};
  }
  std::vector<bool> done(n, false);
  for (;;) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && area[i] > 0 && (best == n || area[i] > area[best])) best = i;
    if (best == n) break;
    done[best] = true;
    int x = static_cast<int>(std::floor(center[best].x - size / 2.0 + 0.5));
    int y = static_cast<int>(std::floor(center[best].y - size / 2.0 + 0.5));
    x = std::max(0, std::min(x, width - size));
    y = std::max(0, std::min(y, height - size));
    bool clash = false;
    for (const auto& c : plan.crops) {
      const double ix = std::max(0, std::min(x, c.x) + size - std::max(x, c.x));
      const double iy = std::max(0, std::min(y, c.y) + size - std::max(y, c.y));
      const double inter = ix * iy;
      if (inter / (2.0 * size * size - inter) > max_iou) clash = true;
    }
    if (clash) continue;
    OracleCrop crop{x, y, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const Point c = center[i];
      if (area[i] > 0 && c.x >= x && c.x <= x + size && c.y >= y && c.y <= y + size) {
        crop.covered.push_back(i);
        done[i] = true;
      }
    }
    plan.crops.push_back(std::move(crop));
  }
  return plan;
}

PipelineCounts direct_pipeline_counts(const std::string& dir, double threshold, int crop_size) {
  std::vector<fs::path> images;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".png") images.push_back(e.path());
  std::sort(images.begin(), images.end());

  PipelineCounts counts;
  for (const auto& path : images) {
    ++counts.images;
    const Image img = read_image(path.string());
    std::vector<TextLineAnnotation> anns;
    fs::path side = path;
    side.replace_extension(".jsonl");
    if (std::ifstream in(side); in) {
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        TextLineAnnotation a;
        const auto q = j.at("quad").get<std::vector<double>>();
        for (int i = 0; i < 4; ++i) a.quad[i] = {q[2 * i], q[2 * i + 1]};
        a.quad = clamped(a.quad, img.width, img.height);
        a.transcript = j.at("transcript").get<std::string>();
        if (diagonal_area(a.quad) > 0) anns.push_back(a);
      }
    }
    if (anns.empty()) continue;
    ++counts.ocr_valid;
    const OracleCropPlan plan = direct_crop_plan(anns, img.width, img.height, crop_size);
    if (plan.skipped) {
      ++counts.skipped_small;
      continue;
    }
    for (const auto& c : plan.crops) {
      ++counts.crops;
      Image patch(crop_size, crop_size, img.channels);
      for (int y = 0; y < crop_size; ++y)
        for (int x = 0; x < crop_size; ++x)
          for (int ch = 0; ch < img.channels; ++ch)
            patch.at(y, x, ch) = img.at(c.y + y, c.x + x, ch);
      if (direct_laplacian_score(patch) >= threshold) ++counts.pass;
    }
  }
  return counts;
}

std::pair<Image, Image> fixture_pair(int k, int size) {
  Rng rng(mix_seed(0xF1C7u, static_cast<std::uint64_t>(k)));
  const double fx = rng.uniform(0.05, 0.6), fy = rng.uniform(0.05, 0.6);
  const double phase = rng.uniform(0.0, 6.28);
  const double noise = rng.uniform(0.005, 0.15);
  Image a(size, size, 3), b(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = 0.5 + 0.35 * std::sin(fx * x + fy * y + phase + c) *
                                   std::cos(0.5 * fy * x - 0.3 * fx * y);
        a.at(y, x, c) = v;
        b.at(y, x, c) = std::clamp(v + noise * rng.normal(), 0.0, 1.0);
      }
  return {a, b};
}

}  // namespace textsr::oracle
