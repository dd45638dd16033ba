#pragma once

#include <cstdint>

#include "hmd/dataset.hpp"
#include "hmd/forest.hpp"

namespace hmd {

struct SamplingParams {
  /// Background samples drawn per image, as a multiple of its foreground count.
  double backgroundRatio = 20.0;
  /// Largest allowed pixel-to-center displacement of a foreground sample.
  double maxDisplacement = 40.0;
  std::uint64_t rngSeed = 7;

  void validate() const;
};

/// Every pixel inside a mother contour (votes to the mother centroid) or a
/// daughter contour (votes to the pair midpoint) becomes a foreground sample;
/// background pixels are drawn uniformly without replacement.
TrainingSet build_training_set(const Dataset& dataset, const SamplingParams& params);

}  // namespace hmd
