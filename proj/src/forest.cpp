#include "hmd/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "binary_io.hpp"
#include "hmd/error.hpp"
#include "hmd/parallel.hpp"

namespace hmd {

// ---------------------------------------------------------------------------
// Formulas

ClassPriors ClassPriors::from_counts(const ClassVector& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  ClassPriors priors;
  for (int c = 0; c < kClassCount; ++c) priors.p[c] = total > 0 ? counts[c] / total : 0.0;
  priors.validate();
  return priors;
}

void ClassPriors::validate() const {
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InsufficientData, "class priors must be strictly positive");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "priors must sum to 1");
}

ClassVector weighted_posterior(const ClassVector& counts, const ClassPriors& priors) {
  ClassVector out{};
  double norm = 0.0;
  for (int c = 0; c < kClassCount; ++c) {
    if (counts[c] < 0.0) throw Error(ErrorCode::InvalidArgument, "negative class count");
    out[c] = counts[c] / priors.p[c];
    norm += out[c];
  }
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "posterior undefined: all class counts are zero");
  }
  for (double& v : out) v /= norm;
  return out;
}

double entropy(std::span<const double> posteriors) {
  double h = 0.0;
  for (double p : posteriors) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double vote_scatter(std::span<const Vec2> votes) {
  if (votes.empty()) return 0.0;
  Vec2 mean;
  for (const Vec2& v : votes) mean = mean + v;
  mean = mean * (1.0 / static_cast<double>(votes.size()));
  double vs = 0.0;
  for (const Vec2& v : votes) vs += (v - mean).norm();
  return vs;
}

// ---------------------------------------------------------------------------
// Parameters

std::string_view to_string(ForestMode mode) {
  switch (mode) {
    case ForestMode::HoughForest: return "hf";
    case ForestMode::ClassificationWithVotes: return "cf-hv";
    case ForestMode::Classification: return "cf";
  }
  return "unknown";
}

ForestMode parse_forest_mode(std::string_view name) {
  if (name == "hf") return ForestMode::HoughForest;
  if (name == "cf-hv") return ForestMode::ClassificationWithVotes;
  if (name == "cf") return ForestMode::Classification;
  throw Error(ErrorCode::InvalidArgument, "unknown forest mode '" + std::string(name) +
                                              "' (expected hf, cf-hv or cf)");
}

void ForestParams::apply_mode(ForestMode m) {
  switch (m) {
    case ForestMode::HoughForest:
      if (uniformityProbability <= 0.0) uniformityProbability = 0.5;
      storeVotes = true;
      break;
    case ForestMode::ClassificationWithVotes:
      uniformityProbability = 0.0;
      storeVotes = true;
      break;
    case ForestMode::Classification:
      uniformityProbability = 0.0;
      storeVotes = false;
      break;
  }
}

ForestMode ForestParams::mode() const {
  if (!storeVotes) return ForestMode::Classification;
  return uniformityProbability > 0.0 ? ForestMode::HoughForest
                                     : ForestMode::ClassificationWithVotes;
}

void ForestParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (treeCount < 1) fail("treeCount must be >= 1");
  if (maxDepth < 0) fail("maxDepth must be >= 0");
  if (featuresPerSplit < 1) fail("featuresPerSplit must be >= 1");
  if (thresholdsPerFeature < 1) fail("thresholdsPerFeature must be >= 1");
  if (minLeafSamples < 1) fail("minLeafSamples must be >= 1");
  if (!(uniformityProbability >= 0.0 && uniformityProbability <= 1.0)) {
    fail("uniformityProbability must be in [0,1]");
  }
  patch.validate();
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes[id];
    if (n.is_leaf()) {
      deepest = std::max(deepest, d);
    } else {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return deepest;
}

ClassVector TrainingSet::class_counts() const {
  ClassVector counts{};
  for (const TrainingSample& s : samples) counts[class_index(s.label)] += 1.0;
  return counts;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(base ^ mix(stream + 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------
// Split search

std::vector<double> threshold_grid(double min, double max, int count) {
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    grid[k] = min + (max - min) * static_cast<double>(k + 1) / static_cast<double>(count + 1);
  }
  return grid;
}

namespace {

// Number of thresholds t with t <= v; the sample goes left for every
// threshold index >= this value.
int bin_of(double v, const std::vector<double>& grid, double min, double max) {
  const int count = static_cast<int>(grid.size());
  int j = static_cast<int>(std::floor((v - min) / (max - min) * (count + 1)));
  j = std::clamp(j, 0, count);
  while (j > 0 && grid[j - 1] > v) --j;
  while (j < count && grid[j] <= v) ++j;
  return j;
}

double weighted_total(const ClassVector& c) { return c[0] + c[1] + c[2]; }

double classification_objective(const ClassVector& left, const ClassVector& right,
                                const ClassPriors& priors) {
  const double nl = weighted_total(left);
  const double nr = weighted_total(right);
  const double hl = entropy(weighted_posterior(left, priors));
  const double hr = entropy(weighted_posterior(right, priors));
  return (nl * hl + nr * hr) / (nl + nr);
}

struct FgVote {
  std::size_t pos;  // position in the node span
  int slot;
  double weight;
  Vec2 d;
};

// Scatter of both children summed over foreground classes. Accumulation runs
// in node order so equal partitions produce bit-identical objectives.
double uniformity_objective(const std::vector<FgVote>& fg, const std::vector<int>& bins, int k) {
  double sx[2][2] = {}, sy[2][2] = {}, sw[2][2] = {};  // [side][slot]
  for (const FgVote& v : fg) {
    const int side = bins[v.pos] <= k ? 0 : 1;
    sx[side][v.slot] += v.weight * v.d.x;
    sy[side][v.slot] += v.weight * v.d.y;
    sw[side][v.slot] += v.weight;
  }
  Vec2 mean[2][2];
  for (int side = 0; side < 2; ++side) {
    for (int slot = 0; slot < 2; ++slot) {
      if (sw[side][slot] > 0) mean[side][slot] = {sx[side][slot] / sw[side][slot], sy[side][slot] / sw[side][slot]};
    }
  }
  double vs = 0.0;
  for (const FgVote& v : fg) {
    const int side = bins[v.pos] <= k ? 0 : 1;
    vs += v.weight * (v.d - mean[side][v.slot]).norm();
  }
  return vs;
}

}  // namespace

std::optional<SplitCandidate> best_split_among(const TrainingSet& set,
                                               std::span<const NodeSample> node,
                                               std::span<const HaarFeature> features,
                                               const ForestParams& params,
                                               SplitObjective objective,
                                               const ClassPriors& priors) {
  const int thresholds = params.thresholdsPerFeature;
  const double min_leaf = params.minLeafSamples;

  ClassVector totals{};
  std::vector<FgVote> fg;
  for (std::size_t j = 0; j < node.size(); ++j) {
    const TrainingSample& s = set.samples[node[j].index];
    totals[class_index(s.label)] += node[j].weight;
    if (s.label != ClassLabel::Background) {
      fg.push_back({j, vote_slot(s.label), static_cast<double>(node[j].weight), s.displacement});
    }
  }
  if (weighted_total(totals) < 2 * min_leaf) return std::nullopt;

  // Gathered once so the per-feature loop streams through contiguous memory.
  std::vector<const IntegralImage*> images(node.size());
  std::vector<Point> positions(node.size());
  std::vector<int> labels(node.size());
  std::vector<double> weights(node.size());
  for (std::size_t j = 0; j < node.size(); ++j) {
    const TrainingSample& s = set.samples[node[j].index];
    images[j] = set.integrals[s.imageId].data();
    positions[j] = s.position;
    labels[j] = class_index(s.label);
    weights[j] = node[j].weight;
  }

  std::vector<double> values(node.size());
  std::vector<int> bins(node.size());
  std::vector<ClassVector> hist(static_cast<std::size_t>(thresholds) + 1);
  std::optional<SplitCandidate> best;

  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const HaarFeature& f = features[fi];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < node.size(); ++j) {
      values[j] = evaluate_feature(f, std::span(images[j], f.channel + 1), positions[j]);
      lo = std::min(lo, values[j]);
      hi = std::max(hi, values[j]);
    }
    if (!(hi > lo)) continue;

    const std::vector<double> grid = threshold_grid(lo, hi, thresholds);
    std::fill(hist.begin(), hist.end(), ClassVector{});
    for (std::size_t j = 0; j < node.size(); ++j) {
      bins[j] = bin_of(values[j], grid, lo, hi);
      hist[bins[j]][labels[j]] += weights[j];
    }

    ClassVector left{};
    for (int k = 0; k < thresholds; ++k) {
      const ClassVector& h = hist[k];
      left[0] += h[0];
      left[1] += h[1];
      left[2] += h[2];
      // An empty bin repeats the previous partition, which already had its turn.
      if (k > 0 && weighted_total(h) == 0.0) continue;
      const double nl = weighted_total(left);
      const double nr = weighted_total(totals) - nl;
      if (nl < min_leaf || nr < min_leaf) continue;

      double value;
      if (objective == SplitObjective::Classification) {
        const ClassVector right{totals[0] - left[0], totals[1] - left[1], totals[2] - left[2]};
        value = classification_objective(left, right, priors);
      } else {
        value = uniformity_objective(fg, bins, k);
      }
      if (!best || value < best->objective) {
        best = SplitCandidate{f, grid[k], value, fi, static_cast<std::size_t>(k)};
      }
    }
  }
  return best;
}

std::optional<SplitCandidate> best_split(const TrainingSet& set, std::span<const NodeSample> node,
                                         std::mt19937_64& rng, const ForestParams& params,
                                         SplitObjective objective, const ClassPriors& priors) {
  std::vector<HaarFeature> features;
  features.reserve(params.featuresPerSplit);
  for (int i = 0; i < params.featuresPerSplit; ++i) features.push_back(sample_feature(rng, params.patch));
  return best_split_among(set, node, features, params, objective, priors);
}

// ---------------------------------------------------------------------------
// Training

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& set, std::vector<NodeSample> samples, const ForestParams& params,
              const ClassPriors& priors, std::mt19937_64& rng)
      : set_(set), samples_(std::move(samples)), params_(params), priors_(priors), rng_(rng) {}

  Tree build() {
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, int depth) {
    const std::span<const NodeSample> node(samples_.data() + begin, end - begin);
    ClassVector counts{};
    for (const NodeSample& s : node) counts[class_index(set_.samples[s.index].label)] += s.weight;
    const double n = weighted_total(counts);
    const double fg = counts[1] + counts[2];
    const int present = (counts[0] > 0) + (counts[1] > 0) + (counts[2] > 0);
    const double min_leaf = params_.minLeafSamples;

    if (depth >= params_.maxDepth || n < 2 * min_leaf || fg == 0.0) return make_leaf(node, counts);

    SplitObjective objective = SplitObjective::Classification;
    const bool uniformity_ok = params_.uniformityProbability > 0.0 && fg >= 2 * min_leaf;
    if (uniformity_ok &&
        (present == 1 || std::bernoulli_distribution(params_.uniformityProbability)(rng_))) {
      objective = SplitObjective::Uniformity;
    } else if (present == 1) {
      // Nothing left to separate.
      return make_leaf(node, counts);
    }

    const auto split = best_split(set_, node, rng_, params_, objective, priors_);
    if (!split) return make_leaf(node, counts);

    auto goes_left = [&](const NodeSample& s) {
      const TrainingSample& t = set_.samples[s.index];
      return evaluate_feature(split->feature, set_.integrals[t.imageId], t.position) <
             split->threshold;
    };
    const auto mid_it = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                              goes_left);
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({split->feature, split->threshold, -1, -1, -1});
    const std::int32_t left = grow(begin, mid, depth + 1);
    const std::int32_t right = grow(mid, end, depth + 1);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  std::int32_t make_leaf(std::span<const NodeSample> node, const ClassVector& counts) {
    Leaf leaf;
    leaf.rawCounts = counts;
    leaf.posteriors = weighted_posterior(counts, priors_);
    if (params_.storeVotes) {
      for (const NodeSample& s : node) {
        const TrainingSample& t = set_.samples[s.index];
        if (t.label == ClassLabel::Background) continue;
        auto& votes = leaf.votes[vote_slot(t.label)];
        for (std::uint32_t w = 0; w < s.weight; ++w) votes.push_back(t.displacement);
      }
    }
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    TreeNode terminal;
    terminal.leaf = static_cast<std::int32_t>(tree_.leaves.size());
    tree_.nodes.push_back(terminal);
    tree_.leaves.push_back(std::move(leaf));
    return id;
  }

  const TrainingSet& set_;
  std::vector<NodeSample> samples_;
  const ForestParams& params_;
  const ClassPriors& priors_;
  std::mt19937_64& rng_;
  Tree tree_;
};

}  // namespace

Tree train_tree(const TrainingSet& set, std::vector<NodeSample> samples,
                const ForestParams& params, const ClassPriors& priors, std::mt19937_64& rng) {
  const bool has_fg = std::any_of(samples.begin(), samples.end(), [&](const NodeSample& s) {
    return s.weight > 0 && set.samples[s.index].label != ClassLabel::Background;
  });
  if (samples.empty() || !has_fg) {
    throw Error(ErrorCode::InsufficientData, "tree training needs at least one foreground sample");
  }
  return TreeBuilder(set, std::move(samples), params, priors, rng).build();
}

HoughForestModel train_forest(const TrainingSet& set, const ForestParams& params) {
  params.validate();
  const ClassVector counts = set.class_counts();
  for (int c = 0; c < kClassCount; ++c) {
    if (counts[c] == 0.0) {
      throw Error(ErrorCode::InsufficientData,
                  "training data has no " + std::string(to_string(static_cast<ClassLabel>(c))) +
                      " samples");
    }
  }

  HoughForestModel model;
  model.params = params;
  model.priors = ClassPriors::from_counts(counts);
  model.trees.resize(static_cast<std::size_t>(params.treeCount));

  const auto n = static_cast<std::uint32_t>(set.samples.size());
  parallel_for(model.trees.size(), [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(params.rngSeed, t));
    std::vector<NodeSample> samples;
    if (params.bootstrap) {
      std::vector<std::uint32_t> multiplicity(n, 0);
      std::uniform_int_distribution<std::uint32_t> pick(0, n - 1);
      for (std::uint32_t i = 0; i < n; ++i) ++multiplicity[pick(rng)];
      for (std::uint32_t i = 0; i < n; ++i) {
        if (multiplicity[i] > 0) samples.push_back({i, multiplicity[i]});
      }
    } else {
      samples.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) samples.push_back({i, 1});
    }
    model.trees[t] = train_tree(set, std::move(samples), params, model.priors, rng);
  });
  return model;
}

// ---------------------------------------------------------------------------
// Prediction

const Leaf& predict_leaf(const HoughForestModel& model, std::size_t tree,
                         std::span<const IntegralImage> integrals, Point position) {
  const Tree& t = model.trees.at(tree);
  std::int32_t id = 0;
  while (!t.nodes[id].is_leaf()) {
    const TreeNode& n = t.nodes[id];
    id = evaluate_feature(n.feature, integrals, position) < n.threshold ? n.left : n.right;
  }
  return t.leaves[t.nodes[id].leaf];
}

ClassVector predict_posteriors(const HoughForestModel& model,
                               std::span<const IntegralImage> integrals, Point position) {
  ClassVector mean{};
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const Leaf& leaf = predict_leaf(model, t, integrals, position);
    for (int c = 0; c < kClassCount; ++c) mean[c] += leaf.posteriors[c];
  }
  for (double& v : mean) v /= static_cast<double>(model.trees.size());
  return mean;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr std::string_view kMagic = "HMDF";
constexpr std::string_view kTrailer = "FDMH";

void write_rect(detail::ByteWriter& w, const Rect& r) {
  w.i32(r.x0);
  w.i32(r.y0);
  w.i32(r.x1);
  w.i32(r.y1);
}

Rect read_rect(detail::ByteReader& r) {
  Rect out;
  out.x0 = r.i32();
  out.y0 = r.i32();
  out.x1 = r.i32();
  out.y1 = r.i32();
  return out;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptFile, "corrupt model file: " + what);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const HoughForestModel& model) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kModelFormatVersion);

  const ForestParams& p = model.params;
  w.i32(p.treeCount);
  w.i32(p.maxDepth);
  w.i32(p.featuresPerSplit);
  w.i32(p.thresholdsPerFeature);
  w.i32(p.minLeafSamples);
  w.f64(p.uniformityProbability);
  w.u8(p.storeVotes ? 1 : 0);
  w.u8(p.bootstrap ? 1 : 0);
  w.u64(p.rngSeed);
  w.i32(p.patch.patchRadius);
  w.i32(p.patch.channelCount);
  for (double v : model.priors.p) w.f64(v);

  w.u32(static_cast<std::uint32_t>(model.trees.size()));
  for (const Tree& tree : model.trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& n : tree.nodes) {
      if (n.is_leaf()) {
        w.u8(1);
        w.i32(n.leaf);
        continue;
      }
      w.u8(0);
      w.i32(n.feature.channel);
      w.u8(static_cast<std::uint8_t>(n.feature.mode));
      write_rect(w, n.feature.rectA);
      write_rect(w, n.feature.rectB);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
    }
    w.u32(static_cast<std::uint32_t>(tree.leaves.size()));
    for (const Leaf& leaf : tree.leaves) {
      for (double v : leaf.posteriors) w.f64(v);
      for (double v : leaf.rawCounts) w.f64(v);
      for (const auto& votes : leaf.votes) {
        w.u32(static_cast<std::uint32_t>(votes.size()));
        for (const Vec2& v : votes) {
          w.f64(v.x);
          w.f64(v.y);
        }
      }
    }
  }
  w.bytes(kTrailer);
  return w.take();
}

HoughForestModel deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic) corrupt("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kModelFormatVersion) + ")");
  }

  HoughForestModel model;
  ForestParams& p = model.params;
  p.treeCount = r.i32();
  p.maxDepth = r.i32();
  p.featuresPerSplit = r.i32();
  p.thresholdsPerFeature = r.i32();
  p.minLeafSamples = r.i32();
  p.uniformityProbability = r.f64();
  p.storeVotes = r.u8() != 0;
  p.bootstrap = r.u8() != 0;
  p.rngSeed = r.u64();
  p.patch.patchRadius = r.i32();
  p.patch.channelCount = r.i32();
  for (double& v : model.priors.p) v = r.f64();
  try {
    p.validate();
    model.priors.validate();
  } catch (const Error& e) {
    corrupt(e.what());
  }

  const std::uint32_t tree_count = r.u32();
  if (tree_count != static_cast<std::uint32_t>(p.treeCount)) corrupt("tree count mismatch");
  model.trees.resize(tree_count);
  for (Tree& tree : model.trees) {
    const std::uint32_t node_count = r.u32();
    if (node_count == 0 || node_count > r.remaining()) corrupt("bad node count");
    tree.nodes.resize(node_count);
    for (TreeNode& n : tree.nodes) {
      const std::uint8_t kind = r.u8();
      if (kind == 1) {
        n.leaf = r.i32();
        continue;
      }
      if (kind != 0) corrupt("bad node kind");
      n.feature.channel = r.i32();
      const std::uint8_t mode = r.u8();
      if (mode > 1) corrupt("bad feature mode");
      n.feature.mode = static_cast<FeatureMode>(mode);
      n.feature.rectA = read_rect(r);
      n.feature.rectB = read_rect(r);
      n.threshold = r.f64();
      n.left = r.i32();
      n.right = r.i32();
      if (!n.feature.within(p.patch)) corrupt("feature outside patch");
    }
    const std::uint32_t leaf_count = r.u32();
    if (leaf_count > r.remaining()) corrupt("bad leaf count");
    tree.leaves.resize(leaf_count);
    for (Leaf& leaf : tree.leaves) {
      for (double& v : leaf.posteriors) v = r.f64();
      for (double& v : leaf.rawCounts) v = r.f64();
      for (auto& votes : leaf.votes) {
        const std::uint32_t count = r.u32();
        if (count > r.remaining() / 16) corrupt("bad vote count");
        votes.resize(count);
        for (Vec2& v : votes) {
          v.x = r.f64();
          v.y = r.f64();
        }
      }
    }
    for (const TreeNode& n : tree.nodes) {
      const auto nodes = static_cast<std::int32_t>(tree.nodes.size());
      if (n.is_leaf()) {
        if (n.leaf >= static_cast<std::int32_t>(leaf_count)) corrupt("leaf index out of range");
      } else if (n.left <= 0 || n.right <= 0 || n.left >= nodes || n.right >= nodes) {
        corrupt("child index out of range");
      }
    }
  }
  if (r.bytes(kTrailer.size()) != kTrailer) corrupt("missing trailer");
  if (r.remaining() != 0) corrupt("trailing bytes");
  return model;
}

void save_model(const HoughForestModel& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

HoughForestModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::FileNotFound, "model file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace hmd
