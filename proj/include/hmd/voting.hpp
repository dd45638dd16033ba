#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "hmd/forest.hpp"
#include "hmd/image.hpp"

namespace hmd {

/// Non-negative vote accumulator for one foreground class.
struct HoughMap {
  ClassLabel label = ClassLabel::Mother;
  int width = 0;
  int height = 0;
  std::vector<double> values;

  HoughMap() = default;
  HoughMap(ClassLabel label, int width, int height)
      : label(label), width(width), height(height),
        values(static_cast<std::size_t>(width) * height, 0.0) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double max() const;
  double total() const;
};

struct Detection {
  Point position;
  double score = 0.0;
  ClassLabel label = ClassLabel::Mother;
  bool operator==(const Detection&) const = default;
};

/// Maps for Mother and Daughter, indexed by vote_slot().
using HoughMaps = std::array<HoughMap, 2>;

/// Every pixel casts, per tree and foreground class, the leaf's stored votes
/// with weight posterior[c] / |votes[c]| at pixel + round(vote). Out-of-image
/// votes are dropped; maps are divided by the tree count.
HoughMaps cast_votes(const HoughForestModel& model, const MultiChannelImage& image);

/// Same, on precomputed integral images.
HoughMaps cast_votes(const HoughForestModel& model, std::span<const IntegralImage> integrals);

/// Separable Gaussian with symmetric (edge-repeating) reflection; sigma 0 is a copy.
HoughMap smooth(const HoughMap& map, double sigma);

/// Positions that beat every other pixel within Euclidean `radius` (ties go
/// to the earlier row-major position) with value >= threshold and > 0.
/// Sorted by descending score, ties in row-major order.
std::vector<Detection> nms(const HoughMap& map, int radius, double threshold);

/// Forest-averaged class posteriors per pixel, [class][y*width+x].
std::array<std::vector<double>, kClassCount> posterior_maps(
    const HoughForestModel& model, std::span<const IntegralImage> integrals);

/// Classification-only detection: pixels whose arg-max posterior is `label`
/// grouped into 8-connected components. Each component yields its rounded
/// centroid scored by the summed `label` posterior. Sorted like nms().
std::vector<Detection> component_detections(
    const std::array<std::vector<double>, kClassCount>& posteriors, int width, int height,
    ClassLabel label);

/// Rescaled to [0,1] by the map maximum (all-zero maps stay zero).
void save_hough_pgm(const HoughMap& map, const std::filesystem::path& path);

inline constexpr std::uint32_t kHoughRawVersion = 1;
/// "HMDH", u32 version, u8 class, u32 width, u32 height, then width*height
/// little-endian float64 in row-major order.
void save_hough_raw(const HoughMap& map, const std::filesystem::path& path);
HoughMap load_hough_raw(const std::filesystem::path& path);

}  // namespace hmd
