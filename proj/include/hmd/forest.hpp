#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "hmd/features.hpp"
#include "hmd/geometry.hpp"
#include "hmd/image.hpp"

namespace hmd {

using ClassVector = std::array<double, kClassCount>;

inline int class_index(ClassLabel c) { return static_cast<int>(c); }
/// Slot of a foreground class in per-class vote arrays (Mother=0, Daughter=1).
inline int vote_slot(ClassLabel c) { return static_cast<int>(c) - 1; }

/// Pixel sample for training. Background samples carry a zero displacement.
struct TrainingSample {
  int imageId = 0;
  Point position;
  ClassLabel label = ClassLabel::Background;
  Vec2 displacement;  ///< position -> object center (foreground only)
};

/// Class frequencies used to reweight leaf counts. Strictly positive, sum 1.
struct ClassPriors {
  ClassVector p{1.0 / 3, 1.0 / 3, 1.0 / 3};

  static ClassPriors from_counts(const ClassVector& counts);
  void validate() const;
  bool operator==(const ClassPriors&) const = default;
};

/// p_c = (n_c / prior_c) / sum_i (n_i / prior_i). Throws if all counts are 0.
ClassVector weighted_posterior(const ClassVector& counts, const ClassPriors& priors);

/// Shannon entropy -sum p ln p with 0 ln 0 = 0.
double entropy(std::span<const double> posteriors);

/// Sum of Euclidean distances of the votes from their mean; 0 for no votes.
double vote_scatter(std::span<const Vec2> votes);

struct Leaf {
  ClassVector posteriors{};
  ClassVector rawCounts{};
  std::array<std::vector<Vec2>, 2> votes;  ///< indexed by vote_slot()

  const std::vector<Vec2>& votes_for(ClassLabel c) const { return votes[vote_slot(c)]; }
  bool operator==(const Leaf&) const = default;
};

struct TreeNode {
  HaarFeature feature;
  double threshold = 0.0;
  std::int32_t left = -1;   ///< taken when feature value < threshold
  std::int32_t right = -1;
  std::int32_t leaf = -1;   ///< index into Tree::leaves for terminal nodes

  bool is_leaf() const { return leaf >= 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Flat tree; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<Leaf> leaves;

  int depth() const;
  bool operator==(const Tree&) const = default;
};

/// HF: classification and vote-uniformity splits. CF+HV: classification
/// splits only, votes kept. CF: classification splits only, votes dropped.
enum class ForestMode : std::uint8_t { HoughForest = 0, ClassificationWithVotes = 1, Classification = 2 };

std::string_view to_string(ForestMode mode);
ForestMode parse_forest_mode(std::string_view name);

struct ForestParams {
  int treeCount = 8;
  int maxDepth = 19;
  int featuresPerSplit = 500;
  int thresholdsPerFeature = 50;
  int minLeafSamples = 10;
  /// Chance of a vote-uniformity split at nodes with >= 2*minLeafSamples
  /// foreground samples. 0 gives a pure classification forest.
  double uniformityProbability = 0.5;
  bool storeVotes = true;
  bool bootstrap = true;
  std::uint64_t rngSeed = 1;
  PatchSpec patch;

  /// Sets uniformityProbability / storeVotes for an ablation mode.
  void apply_mode(ForestMode mode);
  ForestMode mode() const;
  void validate() const;
  bool operator==(const ForestParams&) const = default;
};

struct HoughForestModel {
  std::vector<Tree> trees;
  ClassPriors priors;
  ForestParams params;

  bool operator==(const HoughForestModel&) const = default;
};

/// Samples plus the integral images they index into.
struct TrainingSet {
  std::vector<std::vector<IntegralImage>> integrals;  ///< [imageId][channel]
  std::vector<TrainingSample> samples;

  ClassVector class_counts() const;
};

/// A sample reaching a node, with its bootstrap multiplicity.
struct NodeSample {
  std::uint32_t index = 0;
  std::uint32_t weight = 1;
};

enum class SplitObjective { Classification, Uniformity };

struct SplitCandidate {
  HaarFeature feature;
  double threshold = 0.0;
  double objective = 0.0;
  std::size_t featureIndex = 0;   ///< position in the offered feature list
  std::size_t thresholdIndex = 0;
};

/// t_k = min + (max - min) * (k + 1) / (count + 1), k = 0..count-1.
std::vector<double> threshold_grid(double min, double max, int count);

/// Classification: count-weighted mean of child entropies of the weighted
/// posteriors. Uniformity: sum over children and foreground classes of the
/// vote scatter. Returns the first minimum in (feature, threshold) order among
/// splits leaving >= minLeafSamples (weighted) on both sides.
std::optional<SplitCandidate> best_split_among(const TrainingSet& set,
                                               std::span<const NodeSample> node,
                                               std::span<const HaarFeature> features,
                                               const ForestParams& params,
                                               SplitObjective objective,
                                               const ClassPriors& priors);

/// Draws featuresPerSplit random features and defers to best_split_among.
std::optional<SplitCandidate> best_split(const TrainingSet& set, std::span<const NodeSample> node,
                                         std::mt19937_64& rng, const ForestParams& params,
                                         SplitObjective objective, const ClassPriors& priors);

Tree train_tree(const TrainingSet& set, std::vector<NodeSample> samples,
                const ForestParams& params, const ClassPriors& priors, std::mt19937_64& rng);

/// Priors come from the full sample pool; each tree sees its own bootstrap
/// resample with an rng derived from (rngSeed, tree index).
HoughForestModel train_forest(const TrainingSet& set, const ForestParams& params);

const Leaf& predict_leaf(const HoughForestModel& model, std::size_t tree,
                         std::span<const IntegralImage> integrals, Point position);

/// Mean of the leaf posteriors over all trees.
ClassVector predict_posteriors(const HoughForestModel& model,
                               std::span<const IntegralImage> integrals, Point position);

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const HoughForestModel& model);
HoughForestModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const HoughForestModel& model, const std::filesystem::path& path);
HoughForestModel load_model(const std::filesystem::path& path);

/// Seed for stream `stream` derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace hmd
