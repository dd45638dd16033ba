#include "hmd/crf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include "json.hpp"

#include "hmd/error.hpp"

namespace hmd {

void DistanceStats::validate() const {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "distance stats need finite mu and sigma > 0");
  }
}

void CrfWeights::validate() const {
  for (double v : {w_m, w_d, w_md, bias}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "CRF weights must be finite");
  }
  stats.validate();
}

double distance_prob(Vec2 m, Vec2 d, const DistanceStats& stats) {
  const double z = ((m - d).norm() - stats.mu) / stats.sigma;
  return std::exp(-0.5 * z * z);
}

DistanceStats fit_distance_stats(std::span<const double> distances) {
  if (distances.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least 2 mitosis events for distance stats");
  }
  const double n = static_cast<double>(distances.size());
  const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : distances) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "mother-daughter distances have zero variance");
  }
  return {mean, sd};
}

double mitosis_score(double h_m, double h_d, double p_dist, const CrfWeights& w) {
  return w.w_m * h_m + w.w_d * h_d + w.w_md * p_dist + w.bias;
}

std::vector<MitosisCandidate> enumerate_candidates(std::span<const Detection> mothers,
                                                   std::span<const Detection> daughters,
                                                   double maxRadius, const DistanceStats& stats) {
  std::vector<MitosisCandidate> out;
  for (const Detection& m : mothers) {
    for (const Detection& d : daughters) {
      const double dx = m.position.x - d.position.x;
      const double dy = m.position.y - d.position.y;
      if (std::hypot(dx, dy) > maxRadius) continue;
      MitosisCandidate c;
      c.mother = m;
      c.daughterPair = d;
      c.features = {m.score, d.score, distance_prob(m.position, d.position, stats)};
      out.push_back(c);
    }
  }
  return out;
}

void score_candidates(std::span<MitosisCandidate> candidates, const CrfWeights& w) {
  for (MitosisCandidate& c : candidates) c.score = mitosis_score(c.features, w);
}

namespace {

auto position_key(const MitosisCandidate& c) {
  return std::make_tuple(c.mother.position.y, c.mother.position.x, c.daughterPair.position.y,
                         c.daughterPair.position.x);
}

// Strict order: higher score first, then row-major positions.
bool ranks_before(const MitosisCandidate& a, const MitosisCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return position_key(a) < position_key(b);
}

}  // namespace

std::optional<MitosisCandidate> map_inference(std::span<const MitosisCandidate> candidates,
                                              const CrfWeights& w) {
  std::optional<MitosisCandidate> best;
  for (MitosisCandidate c : candidates) {
    c.score = mitosis_score(c.features, w);
    if (!best || ranks_before(c, *best)) best = c;
  }
  return best;
}

CrfWeights fit_weights(std::span<const LabeledTriple> triples, const LogisticParams& params,
                       std::vector<double>* loss_history) {
  std::vector<LabeledTriple> data(triples.begin(), triples.end());
  const bool has_pos = std::any_of(data.begin(), data.end(), [](auto& t) { return t.label == 1; });
  const bool has_neg = std::any_of(data.begin(), data.end(), [](auto& t) { return t.label == 0; });
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::SingleClass, "logistic regression needs both positive and negative triples");
  }
  std::sort(data.begin(), data.end(), [](const LabeledTriple& a, const LabeledTriple& b) {
    return std::tie(a.x, a.label) < std::tie(b.x, b.label);
  });

  constexpr int kFeatures = 3;
  const bool active[kFeatures] = {params.mask.mother, params.mask.daughter, params.mask.distance};
  const double n = static_cast<double>(data.size());
  auto raw = [](const LabeledTriple& t, int j) {
    return j == 0 ? t.x.h_m : (j == 1 ? t.x.h_d : t.x.p_dist);
  };

  // Standardize active columns; a constant column carries no information.
  double mean[kFeatures] = {}, scale[kFeatures] = {1, 1, 1};
  int active_count = 0;
  for (int j = 0; j < kFeatures; ++j) {
    if (!active[j]) continue;
    ++active_count;
    for (const auto& t : data) mean[j] += raw(t, j);
    mean[j] /= n;
    double ss = 0.0;
    for (const auto& t : data) ss += (raw(t, j) - mean[j]) * (raw(t, j) - mean[j]);
    scale[j] = std::sqrt(ss / n);
  }
  std::vector<std::array<double, kFeatures>> x(data.size());
  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < kFeatures; ++j) {
      x[i][j] = active[j] && scale[j] > 0.0 ? (raw(data[i], j) - mean[j]) / scale[j] : 0.0;
    }
    y[i] = data[i].label;
  }

  // The loss gradient is Lipschitz with constant <= (1 + #features)/4 + lambda
  // on standardized columns, so this fixed step never increases the loss.
  const double step = 1.0 / (0.25 * (1.0 + active_count) + params.lambda);
  double bias = 0.0;
  double w[kFeatures] = {};

  auto objective = [&](double& gb, double* gw) {
    double loss = 0.0;
    gb = 0.0;
    std::fill(gw, gw + kFeatures, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = bias;
      for (int j = 0; j < kFeatures; ++j) z += w[j] * x[i][j];
      // log(1 + e^z) - y z, evaluated stably.
      loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[i] * z;
      const double r = 1.0 / (1.0 + std::exp(-z)) - y[i];
      gb += r;
      for (int j = 0; j < kFeatures; ++j) gw[j] += r * x[i][j];
    }
    loss /= n;
    gb /= n;
    for (int j = 0; j < kFeatures; ++j) {
      gw[j] = active[j] ? gw[j] / n + params.lambda * w[j] : 0.0;
      loss += 0.5 * params.lambda * w[j] * w[j];
    }
    return loss;
  };

  for (int epoch = 0; epoch < params.maxEpochs; ++epoch) {
    double gb, gw[kFeatures];
    const double loss = objective(gb, gw);
    if (loss_history) loss_history->push_back(loss);
    double gnorm = gb * gb;
    for (double g : gw) gnorm += g * g;
    if (std::sqrt(gnorm) < params.gradientTolerance) break;
    bias -= step * gb;
    for (int j = 0; j < kFeatures; ++j) w[j] -= step * gw[j];
  }

  CrfWeights out;
  double raw_w[kFeatures] = {};
  out.bias = bias;
  for (int j = 0; j < kFeatures; ++j) {
    if (!active[j] || !(scale[j] > 0.0)) continue;
    raw_w[j] = w[j] / scale[j];
    out.bias -= raw_w[j] * mean[j];
  }
  out.w_m = raw_w[0];
  out.w_d = raw_w[1];
  out.w_md = raw_w[2];
  return out;
}

std::vector<MitosisCandidate> select_events(std::vector<MitosisCandidate> candidates) {
  std::sort(candidates.begin(), candidates.end(), ranks_before);
  std::vector<MitosisCandidate> out;
  auto shares = [](const MitosisCandidate& a, const MitosisCandidate& b) {
    return a.mother.position == b.mother.position ||
           a.daughterPair.position == b.daughterPair.position;
  };
  for (const MitosisCandidate& c : candidates) {
    if (std::none_of(out.begin(), out.end(), [&](const auto& s) { return shares(s, c); })) {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<MitosisCandidate> gated_candidates(const HoughMap& mother_map,
                                               const HoughMap& daughter_map,
                                               const DistanceStats& stats,
                                               const MitosisParams& params) {
  auto gated = [&](const HoughMap& map) {
    const double peak = map.max();
    if (!(peak > 0.0)) return std::vector<Detection>{};
    return nms(map, params.nmsRadius, params.candidateFraction * peak);
  };
  const std::vector<Detection> mothers = gated(mother_map);
  const std::vector<Detection> daughters = gated(daughter_map);
  const double max_radius = stats.mu + params.gateSigmas * stats.sigma;
  return enumerate_candidates(mothers, daughters, max_radius, stats);
}

std::vector<MitosisCandidate> detect_mitosis(const HoughMap& mother_map,
                                             const HoughMap& daughter_map, const CrfWeights& w,
                                             const MitosisParams& params) {
  std::vector<MitosisCandidate> candidates =
      gated_candidates(mother_map, daughter_map, w.stats, params);
  score_candidates(candidates, w);
  return select_events(std::move(candidates));
}

std::vector<MitosisCandidate> detect_mitosis(const HoughForestModel& model, const CrfWeights& w,
                                             const MultiChannelImage& frame_t,
                                             const MultiChannelImage& frame_t1,
                                             const MitosisParams& params) {
  const HoughMaps maps_t = cast_votes(model, frame_t);
  const HoughMaps maps_t1 = cast_votes(model, frame_t1);
  return detect_mitosis(smooth(maps_t[vote_slot(ClassLabel::Mother)], params.smoothingSigma),
                        smooth(maps_t1[vote_slot(ClassLabel::Daughter)], params.smoothingSigma),
                        w, params);
}

void save_weights(const CrfWeights& w, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["formatVersion"] = kWeightsFormatVersion;
  j["w_m"] = w.w_m;
  j["w_d"] = w.w_d;
  j["w_md"] = w.w_md;
  j["bias"] = w.bias;
  j["mu"] = w.stats.mu;
  j["sigma"] = w.stats.sigma;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CrfWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "weights file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
  if (!j.contains("formatVersion") || j["formatVersion"] != kWeightsFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, path.string() + ": unsupported weights formatVersion");
  }
  CrfWeights w;
  try {
    w.w_m = j.at("w_m").get<double>();
    w.w_d = j.at("w_d").get<double>();
    w.w_md = j.at("w_md").get<double>();
    w.bias = j.at("bias").get<double>();
    w.stats.mu = j.at("mu").get<double>();
    w.stats.sigma = j.at("sigma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
  w.validate();
  return w;
}

}  // namespace hmd
