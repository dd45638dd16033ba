#include "hmd/ground_truth.hpp"

#include <algorithm>
#include <map>

#include "hmd/error.hpp"

namespace hmd {

bool GroundTruthObject::contains(Vec2 p, RegionRule rule) const {
  for (const Polygon& poly : polygons) {
    if (point_in_polygon(p, poly)) return true;
  }
  return rule == RegionRule::ContoursOrHull && hull.size() >= 3 && point_in_polygon(p, hull);
}

namespace {

GroundTruthObject make_object(int id, ClassLabel label, std::vector<Polygon> polys) {
  GroundTruthObject obj;
  obj.objectId = id;
  obj.label = label;
  obj.polygons = std::move(polys);
  Vec2 sum;
  for (const Polygon& p : obj.polygons) sum = sum + polygon_centroid(p);
  obj.center = sum * (1.0 / static_cast<double>(obj.polygons.size()));
  if (obj.polygons.size() > 1) {
    std::vector<Vec2> all;
    for (const Polygon& p : obj.polygons) all.insert(all.end(), p.begin(), p.end());
    obj.hull = convex_hull(std::move(all));
  }
  return obj;
}

}  // namespace

std::vector<GroundTruthObject> objects_of(const GroundTruthFrame& frame, ClassLabel label) {
  std::map<int, std::vector<Polygon>> grouped;
  for (const GroundTruthContour& c : frame.contours) {
    if (c.label == label) grouped[c.objectId].push_back(c.polygon);
  }
  std::vector<GroundTruthObject> out;
  out.reserve(grouped.size());
  for (auto& [id, polys] : grouped) out.push_back(make_object(id, label, std::move(polys)));
  return out;
}

std::optional<GroundTruthObject> find_object(const GroundTruthFrame& frame, int objectId) {
  std::vector<Polygon> polys;
  ClassLabel label = ClassLabel::Background;
  for (const GroundTruthContour& c : frame.contours) {
    if (c.objectId != objectId) continue;
    if (!polys.empty() && c.label != label) {
      throw Error(ErrorCode::InvalidArgument,
                  "object " + std::to_string(objectId) + " mixes class labels");
    }
    label = c.label;
    polys.push_back(c.polygon);
  }
  if (polys.empty()) return std::nullopt;
  return make_object(objectId, label, std::move(polys));
}

void validate_frame(const GroundTruthFrame& frame) {
  for (const GroundTruthContour& c : frame.contours) {
    if (c.polygon.size() < 3 || !is_simple(c.polygon)) {
      throw Error(ErrorCode::InvalidArgument, "frame " + std::to_string(frame.frameIndex) +
                                                  ": contour of object " +
                                                  std::to_string(c.objectId) +
                                                  " is not a simple polygon");
    }
  }
}

}  // namespace hmd
