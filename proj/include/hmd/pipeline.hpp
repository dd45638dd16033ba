#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hmd/config.hpp"
#include "hmd/crf.hpp"
#include "hmd/dataset.hpp"
#include "hmd/evaluation.hpp"
#include "hmd/forest.hpp"
#include "hmd/voting.hpp"

namespace hmd {

/// Smoothed vote maps of one frame.
struct FrameMaps {
  HoughMap mother;
  HoughMap daughter;
};

/// movieId -> per-frame maps.
using MapSet = std::map<std::string, std::vector<FrameMaps>>;

struct FrameDetections {
  std::string movieId;
  int frameIndex = 0;
  std::vector<Detection> mothers;
  std::vector<Detection> daughters;
};

struct CurveResult {
  std::vector<PrPoint> curve;
  double auc = 0.0;
};

/// Samples the training set and grows a forest in the configured mode.
HoughForestModel train_model(const Dataset& train, const PipelineConfig& cfg);

MapSet compute_maps(const HoughForestModel& model, const Dataset& dataset,
                    const VotingParams& voting);

/// Cell candidates per frame: NMS on the smoothed maps, or posterior
/// components when the model stores no votes.
std::vector<FrameDetections> detect_cells(const HoughForestModel& model, const Dataset& dataset,
                                          const PipelineConfig& cfg);
std::vector<FrameDetections> detect_cells(const MapSet& maps, const VotingParams& voting);

/// Pooled PR curve over every frame of the dataset present in `detections`.
CurveResult evaluate_cells(const std::vector<FrameDetections>& detections, const Dataset& dataset,
                           ClassLabel label, RegionRule rule);

/// Mother-center to daughter-pair-midpoint distances of all annotated events.
std::vector<double> event_distances(const Dataset& dataset);

/// One positive triple per annotated event, read off the maps at the annotated
/// centers; negatives are the `negativesPerPair` best gated candidates per
/// frame pair that match no event, ranked under unit weights.
std::vector<LabeledTriple> crf_training_triples(const MapSet& maps, const Dataset& dataset,
                                                const DistanceStats& stats,
                                                const PipelineConfig& cfg);

CrfWeights train_crf(const MapSet& maps, const Dataset& dataset, const PipelineConfig& cfg,
                     FeatureMask mask = {});

std::vector<ScoredEvent> detect_events(const MapSet& maps, const CrfWeights& weights,
                                       const MitosisParams& params);

CurveResult evaluate_events(const std::vector<ScoredEvent>& events, const Dataset& dataset,
                            RegionRule rule);

/// One train/test split of the mitosis ablation.
struct AblationRow {
  std::string name;
  FeatureMask mask;
  CurveResult result;
};

/// Full model followed by the three two-potential models, all trained on the
/// same triples.
std::vector<AblationRow> run_ablation(const MapSet& train_maps, const Dataset& train,
                                      const MapSet& test_maps, const Dataset& test,
                                      const PipelineConfig& cfg);

/// Movie-level cross-validation with folds drawn from cfg.folds and a seed
/// derived from cfg.seed; a forest is trained per fold.
struct CellCrossValidation {
  CrossValidationResult mother;
  CrossValidationResult daughter;
};
CellCrossValidation cross_validate_cells(const Dataset& dataset, const PipelineConfig& cfg);
CrossValidationResult cross_validate_mitosis(const Dataset& dataset, const PipelineConfig& cfg);

/// Mean AUC over folds for each ablation row.
struct AblationSummary {
  std::string name;
  std::vector<double> foldAuc;
  double meanAuc = 0.0;
};
std::vector<AblationSummary> cross_validate_ablation(const Dataset& dataset,
                                                     const PipelineConfig& cfg);

inline constexpr int kCsvFormatVersion = 1;

void write_detections_csv(const std::vector<FrameDetections>& detections,
                          const std::filesystem::path& path);
std::vector<FrameDetections> read_detections_csv(const std::filesystem::path& path);
void write_events_csv(const std::vector<ScoredEvent>& events, const std::filesystem::path& path);
std::vector<ScoredEvent> read_events_csv(const std::filesystem::path& path);
void write_pr_csv(const std::vector<PrPoint>& curve, const std::filesystem::path& path);
std::vector<PrPoint> read_pr_csv(const std::filesystem::path& path);

/// Plain SVG line plot of one or more named curves.
void write_pr_svg(const std::vector<std::pair<std::string, std::vector<PrPoint>>>& curves,
                  const std::filesystem::path& path);

}  // namespace hmd
