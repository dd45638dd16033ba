#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hmd/crf.hpp"
#include "hmd/forest.hpp"
#include "hmd/ground_truth.hpp"
#include "hmd/sampling.hpp"
#include "hmd/synth.hpp"

namespace hmd {

struct VotingParams {
  double smoothingSigma = 3.0;
  int nmsRadius = 10;
  /// NMS threshold for cell detections; 0 keeps every positive maximum so the
  /// PR sweep sees the whole candidate set.
  double detectionThreshold = 0.0;
};

/// Every tunable of the pipeline. Defaults follow the published setup where
/// one exists (8 trees, depth 19, 500 features x 50 thresholds, 10 samples
/// per leaf).
struct PipelineConfig {
  std::uint64_t seed = 1;
  ForestMode mode = ForestMode::HoughForest;
  ForestParams forest;
  SamplingParams sampling;
  VotingParams voting;
  MitosisParams mitosis;
  LogisticParams logistic;
  int negativesPerPair = 5;
  RegionRule regionRule = RegionRule::ContoursOrHull;
  int folds = 5;  ///< <= 0: leave one movie out
  SynthConfig synth;
  int movieCount = 25;

  /// Re-derives every component seed from `seed`.
  void set_seed(std::uint64_t s);
  void validate() const;
};

/// Defaults for absent keys; unknown keys and invalid values are rejected
/// with an Error naming the key.
PipelineConfig parse_config_text(const std::string& json_text);
PipelineConfig parse_config(const std::filesystem::path& path);

}  // namespace hmd
