#include "hmd/geometry.hpp"

#include <algorithm>

#include "hmd/error.hpp"

namespace hmd {

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Background: return "background";
    case ClassLabel::Mother: return "mother";
    case ClassLabel::Daughter: return "daughter";
  }
  return "unknown";
}

ClassLabel parse_class_label(std::string_view name) {
  if (name == "background") return ClassLabel::Background;
  if (name == "mother") return ClassLabel::Mother;
  if (name == "daughter") return ClassLabel::Daughter;
  throw Error(ErrorCode::InvalidArgument, "unknown class label '" + std::string(name) + "'");
}

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    a += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  }
  return 0.5 * a;
}

namespace {

constexpr double kEps = 1e-9;

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const double len = (b - a).norm();
  if (std::abs(cross(a, b, p)) > kEps * std::max(1.0, len)) return false;
  return p.x >= std::min(a.x, b.x) - kEps && p.x <= std::max(a.x, b.x) + kEps &&
         p.y >= std::min(a.y, b.y) - kEps && p.y <= std::max(a.y, b.y) + kEps;
}

void require_valid(std::span<const Vec2> poly) {
  if (poly.size() < 3) throw Error(ErrorCode::InvalidArgument, "polygon needs >= 3 vertices");
  if (std::abs(signed_area(poly)) < kEps) {
    throw Error(ErrorCode::InvalidArgument, "degenerate polygon (zero area)");
  }
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return on_segment(p1, q1, q2) || on_segment(p2, q1, q2) || on_segment(q1, p1, p2) ||
         on_segment(q2, p1, p2);
}

}  // namespace

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  require_valid(poly);
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[j];
    const Vec2 b = poly[i];
    if (on_segment(p, a, b)) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Vec2 polygon_centroid(std::span<const Vec2> poly) {
  require_valid(poly);
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double w = poly[j].x * poly[i].y - poly[i].x * poly[j].y;
    cx += (poly[j].x + poly[i].x) * w;
    cy += (poly[j].y + poly[i].y) * w;
  }
  const double a6 = 6.0 * signed_area(poly);
  return {cx / a6, cy / a6};
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      // Skip adjacent edges, which share a vertex.
      if (k == i + 1 || (i == 0 && k == n - 1)) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[k], poly[(k + 1) % n])) return false;
    }
  }
  return true;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace hmd
