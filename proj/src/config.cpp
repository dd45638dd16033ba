#include "hmd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hmd/error.hpp"
#include "json.hpp"

namespace hmd {

using nlohmann::json;

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  forest.rngSeed = derive_seed(s, 1);
  sampling.rngSeed = derive_seed(s, 2);
  synth.rngSeed = derive_seed(s, 3);
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::Config, m); };
  try {
    forest.validate();
    sampling.validate();
    synth.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (!(voting.smoothingSigma >= 0.0)) fail("smoothingSigma must be >= 0");
  if (voting.nmsRadius < 1) fail("nmsRadius must be >= 1");
  if (!(voting.detectionThreshold >= 0.0)) fail("detectionThreshold must be >= 0");
  if (!(mitosis.candidateFraction >= 0.0 && mitosis.candidateFraction <= 1.0)) {
    fail("candidateFraction must be in [0,1]");
  }
  if (!(mitosis.gateSigmas > 0.0)) fail("gateSigmas must be > 0");
  if (negativesPerPair < 1) fail("negativesPerPair must be >= 1");
  if (!(logistic.lambda >= 0.0)) fail("lambda must be >= 0");
  if (logistic.maxEpochs < 1) fail("maxEpochs must be >= 1");
  if (movieCount < 1) fail("movieCount must be >= 1");
}

namespace {

template <typename T>
void take(const json& obj, const char* key, T& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Config, std::string("config key '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& scope) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw Error(ErrorCode::Config, "unknown config key '" + scope + key + "'");
    }
  }
}

}  // namespace

PipelineConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");

  PipelineConfig cfg;
  std::set<std::string> seen;
  std::uint64_t seed = cfg.seed;
  take(j, "seed", seed, seen);
  cfg.set_seed(seed);

  std::string mode = std::string(to_string(cfg.mode));
  take(j, "mode", mode, seen);
  try {
    cfg.mode = parse_forest_mode(mode);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }

  ForestParams& f = cfg.forest;
  take(j, "treeCount", f.treeCount, seen);
  take(j, "maxDepth", f.maxDepth, seen);
  take(j, "featuresPerSplit", f.featuresPerSplit, seen);
  take(j, "thresholdsPerFeature", f.thresholdsPerFeature, seen);
  take(j, "minLeafSamples", f.minLeafSamples, seen);
  take(j, "uniformityProbability", f.uniformityProbability, seen);
  take(j, "bootstrap", f.bootstrap, seen);
  take(j, "patchRadius", f.patch.patchRadius, seen);
  f.apply_mode(cfg.mode);

  take(j, "backgroundRatio", cfg.sampling.backgroundRatio, seen);
  take(j, "maxDisplacement", cfg.sampling.maxDisplacement, seen);

  take(j, "smoothingSigma", cfg.voting.smoothingSigma, seen);
  take(j, "nmsRadius", cfg.voting.nmsRadius, seen);
  take(j, "detectionThreshold", cfg.voting.detectionThreshold, seen);
  cfg.mitosis.smoothingSigma = cfg.voting.smoothingSigma;
  cfg.mitosis.nmsRadius = cfg.voting.nmsRadius;

  take(j, "candidateFraction", cfg.mitosis.candidateFraction, seen);
  take(j, "gateSigmas", cfg.mitosis.gateSigmas, seen);
  take(j, "negativesPerPair", cfg.negativesPerPair, seen);
  take(j, "lambda", cfg.logistic.lambda, seen);
  take(j, "maxEpochs", cfg.logistic.maxEpochs, seen);
  take(j, "gradientTolerance", cfg.logistic.gradientTolerance, seen);

  std::string rule = "hull";
  take(j, "regionRule", rule, seen);
  if (rule == "hull") {
    cfg.regionRule = RegionRule::ContoursOrHull;
  } else if (rule == "strict") {
    cfg.regionRule = RegionRule::EitherContour;
  } else {
    throw Error(ErrorCode::Config, "regionRule must be 'hull' or 'strict'");
  }
  take(j, "folds", cfg.folds, seen);
  take(j, "movieCount", cfg.movieCount, seen);

  seen.insert("synth");
  if (j.contains("synth")) {
    const json& s = j["synth"];
    if (!s.is_object()) throw Error(ErrorCode::Config, "config key 'synth' must be an object");
    std::set<std::string> sseen;
    SynthConfig& sc = cfg.synth;
    take(s, "imageSize", sc.imageSize, sseen);
    take(s, "frameCount", sc.frameCount, sseen);
    take(s, "cellCount", sc.cellCount, sseen);
    take(s, "mitosisEventCount", sc.mitosisEventCount, sseen);
    take(s, "cellRadiusMin", sc.cellRadiusMin, sseen);
    take(s, "cellRadiusMax", sc.cellRadiusMax, sseen);
    take(s, "motherBrightnessBoost", sc.motherBrightnessBoost, sseen);
    take(s, "pairDistanceMu", sc.pairDistance.mu, sseen);
    take(s, "pairDistanceSigma", sc.pairDistance.sigma, sseen);
    take(s, "noiseSigma", sc.noiseSigma, sseen);
    reject_unknown(s, sseen, "synth.");
  }
  reject_unknown(j, seen, "");
  cfg.validate();
  return cfg;
}

PipelineConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace hmd
