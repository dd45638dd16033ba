#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hmd/ground_truth.hpp"
#include "hmd/voting.hpp"

namespace hmd {

struct Assignment {
  std::size_t item = 0;   ///< index into the matcher's input
  bool truePositive = false;
  int objectId = -1;      ///< matched object, or a containing one for duplicates
};

struct MatchResult {
  int truePositives = 0;
  int falsePositives = 0;
  int falseNegatives = 0;
  std::vector<Assignment> assignments;  ///< in processing order
};

/// Cell-detection matching. Detections are processed by descending score
/// (ties: row-major position). The best detection inside an object's region
/// is its TP, later ones inside it are FP, detections inside no object of
/// `label` are FP, objects left unmatched are FN.
MatchResult match_detections(std::span<const Detection> detections, const GroundTruthFrame& gt,
                             ClassLabel label, RegionRule rule = RegionRule::ContoursOrHull);

/// A ranked mitosis event located in a movie.
struct ScoredEvent {
  std::string movieId;
  int frameT = 0;
  Point mother;
  Point daughterPair;
  double score = 0.0;
};

/// Looks up annotations of (movieId, frameIndex).
using FrameLookup = std::function<const GroundTruthFrame&(const std::string&, int)>;

/// TP only if the mother position lies in the linked mother contour and the
/// daughter position in the linked daughter-pair region; one TP per ground
/// truth event, everything else FP; unmatched events are FN.
MatchResult match_mitosis(std::span<const ScoredEvent> events,
                          std::span<const GroundTruthEvent> gt_events, const FrameLookup& frames,
                          RegionRule rule = RegionRule::ContoursOrHull);

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 1.0;
};

struct MatchCounts {
  int truePositives = 0;
  int falsePositives = 0;
  int falseNegatives = 0;
};

/// Runs `matcher` on the indices of items with score >= t for every distinct
/// score t (descending), preceded by the empty set at t = +inf. Precision of
/// an empty selection is 1. Throws when there is no ground truth.
std::vector<PrPoint> pr_curve(std::span<const double> scores,
                              const std::function<MatchCounts(std::span<const std::size_t>)>& matcher);

/// Same curve from a single greedy pass: valid for matchers whose decisions
/// on a score-ordered prefix do not depend on later items (both matchers
/// above). `truePositive[i]` refers to `scores[i]`.
std::vector<PrPoint> pr_curve_ranked(std::span<const double> scores,
                                     const std::vector<bool>& truePositive, int groundTruthCount);

/// Trapezoidal area over recall; recall never reached contributes nothing.
double auc(std::span<const PrPoint> points);

/// Movie-level folds: sorted ids shuffled by `seed`, dealt round-robin.
/// folds <= 0 means leave-one-movie-out.
std::vector<std::vector<std::string>> assign_folds(std::vector<std::string> movie_ids, int folds,
                                                   std::uint64_t seed);

struct FoldOutcome {
  double auc = 0.0;
  std::vector<PrPoint> curve;
};

struct CrossValidationResult {
  std::vector<std::vector<std::string>> testMovies;
  std::vector<FoldOutcome> folds;
  double meanAuc = 0.0;
};

using FoldRunner = std::function<FoldOutcome(const std::vector<std::string>& train,
                                             const std::vector<std::string>& test)>;

CrossValidationResult cross_validate(const std::vector<std::string>& movie_ids, int folds,
                                     std::uint64_t seed, const FoldRunner& run_fold);

}  // namespace hmd
