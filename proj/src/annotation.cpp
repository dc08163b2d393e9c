#include "textsr/annotation.hpp"

#include <algorithm>
#include <cmath>

#include "textsr/error.hpp"

namespace textsr {
namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point p, Point q, Point r) {
  return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
         std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

int orientation(Point p, Point q, Point r) {
  const double v = cross(p, q, r);
  if (v == 0.0) return 0;
  return v > 0 ? 1 : -1;
}

bool segments_intersect(Point p1, Point q1, Point p2, Point q2) {
  const int o1 = orientation(p1, q1, p2), o2 = orientation(p1, q1, q2);
  const int o3 = orientation(p2, q2, p1), o4 = orientation(p2, q2, q1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, q2, q1)) return true;
  if (o3 == 0 && on_segment(p2, p1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

}  // namespace

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::kZh: return "zh";
    case Language::kEn: return "en";
    case Language::kMixed: return "mixed";
    case Language::kOther: return "other";
  }
  return "other";
}

std::optional<Language> language_from_string(std::string_view name) {
  if (name == "zh") return Language::kZh;
  if (name == "en") return Language::kEn;
  if (name == "mixed") return Language::kMixed;
  if (name == "other") return Language::kOther;
  return std::nullopt;
}

double signed_area(const Quad& q) {
  double a = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point& p = q[i];
    const Point& n = q[(i + 1) % 4];
    a += p.x * n.y - n.x * p.y;
  }
  return 0.5 * a;
}

double area(const Quad& q) { return std::fabs(signed_area(q)); }

Point centroid(const Quad& q) {
  Point c;
  for (const auto& p : q) {
    c.x += p.x / 4.0;
    c.y += p.y / 4.0;
  }
  return c;
}

bool is_simple(const Quad& q) {
  return !segments_intersect(q[0], q[1], q[2], q[3]) &&
         !segments_intersect(q[1], q[2], q[3], q[0]);
}

bool contains(const Quad& q, Point p) {
  bool inside = false;
  for (int i = 0, j = 3; i < 4; j = i++) {
    const Point& a = q[i];
    const Point& b = q[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

BoxI bounding_box(const Quad& q, int width, int height) {
  double x0 = q[0].x, x1 = q[0].x, y0 = q[0].y, y1 = q[0].y;
  for (const auto& p : q) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  BoxI b;
  b.x0 = std::clamp(static_cast<int>(std::floor(x0)), 0, width);
  b.y0 = std::clamp(static_cast<int>(std::floor(y0)), 0, height);
  b.x1 = std::clamp(static_cast<int>(std::ceil(x1)), 0, width);
  b.y1 = std::clamp(static_cast<int>(std::ceil(y1)), 0, height);
  return b;
}

bool clamp_quad(Quad& q, double width, double height) {
  bool moved = false;
  for (auto& p : q) {
    const Point before = p;
    p.x = std::clamp(p.x, 0.0, width);
    p.y = std::clamp(p.y, 0.0, height);
    moved |= !(p == before);
  }
  return moved;
}

void make_clockwise(Quad& q) {
  if (signed_area(q) < 0.0) std::swap(q[1], q[3]);
}

Quad translated(const Quad& q, double dx, double dy) {
  Quad out = q;
  for (auto& p : out) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

void to_json(nlohmann::json& j, const TextLineAnnotation& a) {
  nlohmann::json quad = nlohmann::json::array();
  for (const auto& p : a.quad) {
    quad.push_back(p.x);
    quad.push_back(p.y);
  }
  j = {{"quad", quad},
       {"transcript", a.transcript},
       {"language", to_string(a.language)}};
  if (a.scene) j["scene"] = *a.scene;
}

void from_json(const nlohmann::json& j, TextLineAnnotation& a) {
  const auto& quad = j.at("quad");
  if (!quad.is_array() || quad.size() != 8) {
    throw FormatError("quad must be an array of 8 numbers");
  }
  for (int i = 0; i < 4; ++i) {
    a.quad[i] = {quad.at(2 * i).get<double>(), quad.at(2 * i + 1).get<double>()};
  }
  a.transcript = j.at("transcript").get<std::string>();
  const auto lang = j.at("language").get<std::string>();
  const auto parsed = language_from_string(lang);
  if (!parsed) throw FormatError("unknown language tag '" + lang + "'");
  a.language = *parsed;
  a.scene.reset();
  if (j.contains("scene") && !j.at("scene").is_null()) {
    a.scene = j.at("scene").get<std::string>();
  }
}

}  // namespace textsr
