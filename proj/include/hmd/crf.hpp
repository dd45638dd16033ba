#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "hmd/voting.hpp"

namespace hmd {

/// Mother-to-daughter-pair distance model, in pixels.
struct DistanceStats {
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
  bool operator==(const DistanceStats&) const = default;
};

/// Log-linear CRF weights. The partition constant is not represented: it
/// shifts every score equally and cannot change a ranking.
struct CrfWeights {
  double w_m = 0.0;
  double w_d = 0.0;
  double w_md = 0.0;
  double bias = 0.0;
  DistanceStats stats;

  void validate() const;
  bool operator==(const CrfWeights&) const = default;
};

struct CandidateFeatures {
  double h_m = 0.0;
  double h_d = 0.0;
  double p_dist = 0.0;
  auto operator<=>(const CandidateFeatures&) const = default;
};

struct MitosisCandidate {
  Detection mother;        ///< frame t
  Detection daughterPair;  ///< frame t+1
  CandidateFeatures features;
  double score = 0.0;
};

/// exp(-(|m - d| - mu)^2 / (2 sigma^2)): the distance Gaussian scaled to peak 1.
double distance_prob(Vec2 m, Vec2 d, const DistanceStats& stats);
inline double distance_prob(Point m, Point d, const DistanceStats& stats) {
  return distance_prob(Vec2{double(m.x), double(m.y)}, Vec2{double(d.x), double(d.y)}, stats);
}

/// Sample mean and (n-1) standard deviation. Throws for < 2 distances or
/// zero spread.
DistanceStats fit_distance_stats(std::span<const double> distances);

double mitosis_score(double h_m, double h_d, double p_dist, const CrfWeights& w);
inline double mitosis_score(const CandidateFeatures& f, const CrfWeights& w) {
  return mitosis_score(f.h_m, f.h_d, f.p_dist, w);
}

/// Every mother x daughter pair within maxRadius, features filled, score 0.
std::vector<MitosisCandidate> enumerate_candidates(std::span<const Detection> mothers,
                                                   std::span<const Detection> daughters,
                                                   double maxRadius, const DistanceStats& stats);

/// Fills `score` from the weights.
void score_candidates(std::span<MitosisCandidate> candidates, const CrfWeights& w);

/// Exhaustive arg-max of the score; ties go to the smaller (mother, daughter)
/// position in row-major order.
std::optional<MitosisCandidate> map_inference(std::span<const MitosisCandidate> candidates,
                                              const CrfWeights& w);

/// Which potentials take part; a disabled weight stays 0.
struct FeatureMask {
  bool mother = true;
  bool daughter = true;
  bool distance = true;
  bool operator==(const FeatureMask&) const = default;
};

struct LogisticParams {
  double lambda = 1e-4;
  int maxEpochs = 2000;
  double gradientTolerance = 1e-6;
  FeatureMask mask;
};

struct LabeledTriple {
  CandidateFeatures x;
  int label = 0;
};

/// L2-regularized logistic regression by batch gradient descent from zero.
/// Features are standardized internally and the weights mapped back, so the
/// result is in raw feature units. `stats` of the result is left default.
/// Triples are put in canonical order first, so input order does not matter.
/// If `loss_history` is given it receives the objective before each step.
CrfWeights fit_weights(std::span<const LabeledTriple> triples, const LogisticParams& params = {},
                       std::vector<double>* loss_history = nullptr);

struct MitosisParams {
  double smoothingSigma = 3.0;
  int nmsRadius = 10;
  /// Candidate gate: NMS threshold as a fraction of each map's maximum.
  double candidateFraction = 0.1;
  /// Pairing gate: maxRadius = mu + gateSigmas * sigma.
  double gateSigmas = 3.0;
};

/// Greedy one-event-per-detection selection over scored candidates, highest
/// score first (ties as in map_inference).
std::vector<MitosisCandidate> select_events(std::vector<MitosisCandidate> candidates);

/// Candidates of a frame pair: NMS peaks above candidateFraction of each
/// map's maximum, paired within mu + gateSigmas * sigma. Unscored.
std::vector<MitosisCandidate> gated_candidates(const HoughMap& mother_map,
                                               const HoughMap& daughter_map,
                                               const DistanceStats& stats,
                                               const MitosisParams& params);

/// Phase two on precomputed smoothed maps: mother map of frame t, daughter
/// map of frame t+1.
std::vector<MitosisCandidate> detect_mitosis(const HoughMap& mother_map,
                                             const HoughMap& daughter_map, const CrfWeights& w,
                                             const MitosisParams& params);

/// Full pipeline on a frame pair.
std::vector<MitosisCandidate> detect_mitosis(const HoughForestModel& model, const CrfWeights& w,
                                             const MultiChannelImage& frame_t,
                                             const MultiChannelImage& frame_t1,
                                             const MitosisParams& params);

inline constexpr int kWeightsFormatVersion = 1;
void save_weights(const CrfWeights& w, const std::filesystem::path& path);
CrfWeights load_weights(const std::filesystem::path& path);

}  // namespace hmd
