#include "hmd/features.hpp"

#include <utility>

#include "hmd/error.hpp"

namespace hmd {

void PatchSpec::validate() const {
  if (patchRadius < 1) throw Error(ErrorCode::InvalidArgument, "patchRadius must be >= 1");
  if (channelCount < 1) throw Error(ErrorCode::InvalidArgument, "channelCount must be >= 1");
}

bool HaarFeature::within(const PatchSpec& spec) const {
  const int lo = -spec.patchRadius;
  const int hi = spec.patchRadius + 1;
  auto inside = [&](const Rect& r) {
    return !r.empty() && r.x0 >= lo && r.y0 >= lo && r.x1 <= hi && r.y1 <= hi;
  };
  return channel >= 0 && channel < spec.channelCount && inside(rectA) && inside(rectB);
}

namespace {

Rect sample_rect(std::mt19937_64& rng, int radius) {
  // Two distinct corner coordinates per axis on the half-open grid [-r, r+1].
  std::uniform_int_distribution<int> coord(-radius, radius + 1);
  auto axis = [&](int& lo, int& hi) {
    int a = coord(rng);
    int b = coord(rng);
    while (b == a) b = coord(rng);
    if (a > b) std::swap(a, b);
    lo = a;
    hi = b;
  };
  Rect r;
  axis(r.x0, r.x1);
  axis(r.y0, r.y1);
  return r;
}

}  // namespace

HaarFeature sample_feature(std::mt19937_64& rng, const PatchSpec& spec) {
  HaarFeature f;
  f.channel = std::uniform_int_distribution<int>(0, spec.channelCount - 1)(rng);
  f.mode = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? FeatureMode::SingleRectMean
                                                              : FeatureMode::TwoRectMeanDifference;
  f.rectA = sample_rect(rng, spec.patchRadius);
  f.rectB = sample_rect(rng, spec.patchRadius);
  return f;
}

}  // namespace hmd
