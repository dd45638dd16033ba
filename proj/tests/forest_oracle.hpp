#pragma once

// Independent re-implementation of the split search used as a test oracle:
// feature values come from pixel loops, objectives from first principles.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hmd/forest.hpp"
#include "test_util.hpp"

namespace hmd::test {

struct OracleSplit {
  std::size_t feature = 0;
  std::size_t threshold = 0;
  double objective = 0.0;
};

inline double oracle_entropy(const ClassVector& counts, const ClassPriors& priors) {
  double z = 0.0;
  for (int c = 0; c < kClassCount; ++c) z += counts[c] / priors.p[c];
  double h = 0.0;
  for (int c = 0; c < kClassCount; ++c) {
    const double p = counts[c] / priors.p[c] / z;
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

inline double oracle_scatter(const std::vector<Vec2>& votes) {
  if (votes.empty()) return 0.0;
  double mx = 0, my = 0;
  for (const Vec2& v : votes) mx += v.x, my += v.y;
  mx /= votes.size();
  my /= votes.size();
  double s = 0;
  for (const Vec2& v : votes) s += std::sqrt((v.x - mx) * (v.x - mx) + (v.y - my) * (v.y - my));
  return s;
}

/// Objective of every (feature, threshold) candidate that respects minLeaf;
/// NaN marks rejected candidates.
inline std::vector<std::vector<double>> oracle_objectives(
    const std::vector<MultiChannelImage>& images, const TrainingSet& set,
    const std::vector<NodeSample>& node, const std::vector<HaarFeature>& features,
    const ForestParams& params, SplitObjective objective, const ClassPriors& priors) {
  const int T = params.thresholdsPerFeature;
  std::vector<std::vector<double>> out(features.size(),
                                       std::vector<double>(T, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    std::vector<double> v;
    for (const NodeSample& s : node) {
      const TrainingSample& t = set.samples[s.index];
      v.push_back(brute_feature(features[fi], images[t.imageId], t.position));
    }
    double lo = v[0], hi = v[0];
    for (double x : v) lo = std::min(lo, x), hi = std::max(hi, x);
    if (!(hi > lo)) continue;
    for (int k = 0; k < T; ++k) {
      const double thr = lo + (hi - lo) * (k + 1) / (T + 1);
      ClassVector cl{}, cr{};
      std::vector<Vec2> votes[2][2];
      for (std::size_t j = 0; j < node.size(); ++j) {
        const TrainingSample& t = set.samples[node[j].index];
        const int side = v[j] < thr ? 0 : 1;
        (side == 0 ? cl : cr)[static_cast<int>(t.label)] += node[j].weight;
        if (t.label != ClassLabel::Background) {
          for (std::uint32_t r = 0; r < node[j].weight; ++r) {
            votes[side][static_cast<int>(t.label) - 1].push_back(t.displacement);
          }
        }
      }
      const double nl = cl[0] + cl[1] + cl[2], nr = cr[0] + cr[1] + cr[2];
      if (nl < params.minLeafSamples || nr < params.minLeafSamples) continue;
      if (objective == SplitObjective::Classification) {
        out[fi][k] = (nl * oracle_entropy(cl, priors) + nr * oracle_entropy(cr, priors)) / (nl + nr);
      } else {
        out[fi][k] = oracle_scatter(votes[0][0]) + oracle_scatter(votes[0][1]) +
                     oracle_scatter(votes[1][0]) + oracle_scatter(votes[1][1]);
      }
    }
  }
  return out;
}

inline std::optional<OracleSplit> oracle_best(const std::vector<std::vector<double>>& table) {
  std::optional<OracleSplit> best;
  for (std::size_t f = 0; f < table.size(); ++f) {
    for (std::size_t k = 0; k < table[f].size(); ++k) {
      const double v = table[f][k];
      if (std::isnan(v)) continue;
      if (!best || v < best->objective) best = OracleSplit{f, k, v};
    }
  }
  return best;
}

/// Random node over random images, labels, displacements and multiplicities.
struct RandomNode {
  std::vector<MultiChannelImage> images;
  TrainingSet set;
  std::vector<NodeSample> node;
  std::vector<HaarFeature> features;
  ForestParams params;
  ClassPriors priors;
};

inline RandomNode random_node(std::mt19937_64& rng, int samples, int features, int thresholds) {
  RandomNode r;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2; ++i) {
    r.images.push_back(random_image(rng, 16, 16));
    r.set.integrals.push_back(build_integrals(r.images.back()));
  }
  for (int i = 0; i < samples; ++i) {
    TrainingSample s;
    s.imageId = static_cast<int>(rng() % 2);
    s.position = {static_cast<int>(rng() % 16), static_cast<int>(rng() % 16)};
    s.label = static_cast<ClassLabel>(rng() % 3);
    if (s.label != ClassLabel::Background) s.displacement = {u(rng) * 20 - 10, u(rng) * 20 - 10};
    r.set.samples.push_back(s);
    r.node.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(1 + rng() % 3)});
  }
  r.params.thresholdsPerFeature = thresholds;
  r.params.featuresPerSplit = features;
  r.params.minLeafSamples = 1 + static_cast<int>(rng() % 5);
  r.params.patch = {4, 2};
  for (int i = 0; i < features; ++i) r.features.push_back(sample_feature(rng, r.params.patch));
  const double a = 0.2 + 0.6 * u(rng), b = (1 - a) * u(rng);
  r.priors.p = {a, b, 1 - a - b};
  if (r.priors.p[1] <= 0 || r.priors.p[2] <= 0) r.priors.p = {0.5, 0.25, 0.25};
  return r;
}

}  // namespace hmd::test
