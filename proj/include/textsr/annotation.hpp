#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace textsr {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Quad = std::array<Point, 4>;

enum class Language : std::uint8_t { kZh, kEn, kMixed, kOther };

std::string_view to_string(Language lang);
std::optional<Language> language_from_string(std::string_view name);

struct TextLineAnnotation {
  Quad quad;  // clockwise in image coordinates (y down)
  std::string transcript;
  Language language = Language::kOther;
  std::optional<std::string> scene;

  friend bool operator==(const TextLineAnnotation&,
                         const TextLineAnnotation&) = default;
};

// Shoelace area; positive for clockwise order in y-down coordinates.
double signed_area(const Quad& q);
double area(const Quad& q);
Point centroid(const Quad& q);  // vertex mean
bool is_simple(const Quad& q);  // no two non-adjacent edges intersect

// Even-odd point-in-polygon.
bool contains(const Quad& q, Point p);

struct BoxI {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0, x1) x [y0, y1)
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

// Smallest pixel rectangle containing the quad, clipped to width x height.
BoxI bounding_box(const Quad& q, int width, int height);

// Clamps every vertex into [0, width] x [0, height]. Returns true if any
// vertex moved.
bool clamp_quad(Quad& q, double width, double height);

// Reverses vertex order if needed so the quad is clockwise.
void make_clockwise(Quad& q);

Quad translated(const Quad& q, double dx, double dy);

void to_json(nlohmann::json& j, const TextLineAnnotation& a);
void from_json(const nlohmann::json& j, TextLineAnnotation& a);

}  // namespace textsr
