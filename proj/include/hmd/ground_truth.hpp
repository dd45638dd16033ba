#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmd/geometry.hpp"

namespace hmd {

struct GroundTruthContour {
  Polygon polygon;
  ClassLabel label = ClassLabel::Background;
  int objectId = 0;
};

/// Annotations of one frame. A daughter pair is one object represented by
/// two contours sharing an objectId.
struct GroundTruthFrame {
  int frameIndex = 0;
  std::vector<GroundTruthContour> contours;
};

/// Mother in frame `frameT` linked to a daughter pair in frame `frameT + 1`.
struct GroundTruthEvent {
  std::string movieId;
  int frameT = 0;
  int motherObjectId = 0;
  int daughterPairObjectId = 0;
};

/// How a multi-contour object (daughter pair) decides containment.
enum class RegionRule {
  EitherContour,        ///< inside one of the member contours
  ContoursOrHull,       ///< ... or inside the convex hull of all member vertices
};

/// An annotated object gathered from the contours sharing one objectId.
struct GroundTruthObject {
  int objectId = 0;
  ClassLabel label = ClassLabel::Background;
  std::vector<Polygon> polygons;
  Polygon hull;  ///< empty for single-contour objects
  /// Mother: contour centroid. Daughter pair: midpoint of the two centroids.
  Vec2 center;

  bool contains(Vec2 p, RegionRule rule) const;
};

std::vector<GroundTruthObject> objects_of(const GroundTruthFrame& frame, ClassLabel label);
std::optional<GroundTruthObject> find_object(const GroundTruthFrame& frame, int objectId);

/// Throws on polygons that are not simple or have < 3 vertices.
void validate_frame(const GroundTruthFrame& frame);

}  // namespace hmd
