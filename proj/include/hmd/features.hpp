#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "hmd/image.hpp"

namespace hmd {

enum class FeatureMode : std::uint8_t { SingleRectMean = 0, TwoRectMeanDifference = 1 };

/// Sampling window for features: a (2r+1)^2 patch centered on the pixel.
struct PatchSpec {
  int patchRadius = 12;
  int channelCount = 2;

  void validate() const;
  bool operator==(const PatchSpec&) const = default;
};

/// Haar-like test over one channel. Rectangles are patch-relative and lie in
/// [-r, r+1) on both axes. In single-rect mode `rectB` is carried but unused.
struct HaarFeature {
  int channel = 0;
  Rect rectA;
  Rect rectB;
  FeatureMode mode = FeatureMode::SingleRectMean;

  bool within(const PatchSpec& spec) const;
  bool operator==(const HaarFeature&) const = default;
};

HaarFeature sample_feature(std::mt19937_64& rng, const PatchSpec& spec);

namespace detail {

inline double clipped_mean(const IntegralImage& ii, const Rect& r) {
  const Rect c = r.clipped(ii.width(), ii.height());
  if (c.empty()) return 0.0;
  return ii.sum_unchecked(c) / static_cast<double>(c.area());
}

}  // namespace detail

/// Mean of rectA (or meanA - meanB) translated to `center`. Rectangles are
/// clipped to the image and averaged over the clipped area.
inline double evaluate_feature(const HaarFeature& f, std::span<const IntegralImage> integrals,
                               Point center) {
  const IntegralImage& ii = integrals[f.channel];
  const double a = detail::clipped_mean(ii, f.rectA.translated(center.x, center.y));
  if (f.mode == FeatureMode::SingleRectMean) return a;
  return a - detail::clipped_mean(ii, f.rectB.translated(center.x, center.y));
}

}  // namespace hmd
