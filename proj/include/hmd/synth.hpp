#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmd/crf.hpp"
#include "hmd/dataset.hpp"

namespace hmd {

struct SynthConfig {
  int imageSize = 128;
  int frameCount = 4;
  int cellCount = 40;           ///< non-dividing cells per frame
  int mitosisEventCount = 2;
  double cellRadiusMin = 5.0;
  double cellRadiusMax = 7.0;
  double motherBrightnessBoost = 1.4;
  DistanceStats pairDistance{6.0, 2.0};  ///< mother center -> daughter-pair midpoint
  double noiseSigma = 0.16;
  std::uint64_t rngSeed = 1;

  void validate() const;
};

enum class CellKind { Normal, Mother, Daughter };

/// A drawn ellipse; exposed for tests and debugging.
struct SynthCell {
  CellKind kind = CellKind::Normal;
  Vec2 center;
  double semiMajor = 0.0;
  double semiMinor = 0.0;
  double angle = 0.0;
  double membrane = 0.0;  ///< ring intensity, channel 0
  double nucleus = 0.0;   ///< blob intensity, channel 1
  double nucleusScale = 0.55;
  int objectId = -1;      ///< annotated objects only

  Polygon outline(int vertices = 32) const;
};

struct SynthSequence {
  Movie movie;
  std::vector<std::vector<SynthCell>> cells;  ///< per frame
};

/// One movie of densely packed, touching cells: membrane rings in channel 0, nuclei in channel 1, scripted
/// divisions (round bright mother at t, two smaller daughters at t+1 whose
/// midpoint lies ~pairDistance from the mother), Gaussian noise clamped to
/// [0,1]. Deterministic in rngSeed.
SynthSequence generate_sequence(const SynthConfig& config, const std::string& movieId = "m000");

/// `movieCount` movies `m000`, `m001`, ... each seeded from (rngSeed, index).
Dataset generate_dataset(const SynthConfig& config, int movieCount);

}  // namespace hmd
