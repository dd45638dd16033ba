#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hmd {

enum class ClassLabel : std::uint8_t { Background = 0, Mother = 1, Daughter = 2 };
inline constexpr int kClassCount = 3;
inline constexpr ClassLabel kForegroundClasses[] = {ClassLabel::Mother, ClassLabel::Daughter};

std::string_view to_string(ClassLabel label);
ClassLabel parse_class_label(std::string_view name);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

using Polygon = std::vector<Vec2>;

/// Even-odd crossing test; points on an edge or vertex count as inside.
/// Throws on fewer than 3 vertices or zero area.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

double signed_area(std::span<const Vec2> poly);
/// Area centroid.
Vec2 polygon_centroid(std::span<const Vec2> poly);
/// True if no two non-adjacent edges intersect.
bool is_simple(std::span<const Vec2> poly);
/// Counter-clockwise hull (monotone chain), collinear points dropped.
Polygon convex_hull(std::vector<Vec2> points);

}  // namespace hmd
