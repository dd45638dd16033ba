#include "hmd/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "hmd/error.hpp"

namespace hmd {

namespace {

Vec2 to_vec(Point p) { return {static_cast<double>(p.x), static_cast<double>(p.y)}; }

}  // namespace

MatchResult match_detections(std::span<const Detection> detections, const GroundTruthFrame& gt,
                             ClassLabel label, RegionRule rule) {
  const std::vector<GroundTruthObject> objects = objects_of(gt, label);
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Detection& da = detections[a];
    const Detection& db = detections[b];
    if (da.score != db.score) return da.score > db.score;
    return std::tie(da.position.y, da.position.x) < std::tie(db.position.y, db.position.x);
  });

  MatchResult result;
  std::vector<bool> matched(objects.size(), false);
  for (std::size_t i : order) {
    const Vec2 p = to_vec(detections[i].position);
    Assignment a{i, false, -1};
    for (std::size_t o = 0; o < objects.size(); ++o) {
      if (!objects[o].contains(p, rule)) continue;
      if (!matched[o]) {
        matched[o] = true;
        a.truePositive = true;
        a.objectId = objects[o].objectId;
        break;
      }
      if (a.objectId < 0) a.objectId = objects[o].objectId;
    }
    (a.truePositive ? result.truePositives : result.falsePositives)++;
    result.assignments.push_back(a);
  }
  result.falseNegatives = static_cast<int>(std::count(matched.begin(), matched.end(), false));
  return result;
}

MatchResult match_mitosis(std::span<const ScoredEvent> events,
                          std::span<const GroundTruthEvent> gt_events, const FrameLookup& frames,
                          RegionRule rule) {
  struct Target {
    const GroundTruthEvent* event;
    GroundTruthObject mother;
    GroundTruthObject pair;
  };
  std::vector<Target> targets;
  for (const GroundTruthEvent& e : gt_events) {
    auto mother = find_object(frames(e.movieId, e.frameT), e.motherObjectId);
    auto pair = find_object(frames(e.movieId, e.frameT + 1), e.daughterPairObjectId);
    if (!mother || !pair || mother->label != ClassLabel::Mother ||
        pair->label != ClassLabel::Daughter) {
      throw Error(ErrorCode::InvalidArgument, "mitosis event in movie " + e.movieId +
                                                  " references missing or mislabelled objects");
    }
    targets.push_back({&e, std::move(*mother), std::move(*pair)});
  }

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const ScoredEvent& ea = events[a];
    const ScoredEvent& eb = events[b];
    if (ea.score != eb.score) return ea.score > eb.score;
    return std::tie(ea.movieId, ea.frameT, ea.mother.y, ea.mother.x, ea.daughterPair.y,
                    ea.daughterPair.x) < std::tie(eb.movieId, eb.frameT, eb.mother.y, eb.mother.x,
                                                  eb.daughterPair.y, eb.daughterPair.x);
  });

  MatchResult result;
  std::vector<bool> matched(targets.size(), false);
  for (std::size_t i : order) {
    const ScoredEvent& e = events[i];
    Assignment a{i, false, -1};
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const Target& target = targets[t];
      if (target.event->movieId != e.movieId || target.event->frameT != e.frameT) continue;
      if (!target.mother.contains(to_vec(e.mother), rule) ||
          !target.pair.contains(to_vec(e.daughterPair), rule)) {
        continue;
      }
      if (!matched[t]) {
        matched[t] = true;
        a.truePositive = true;
        a.objectId = target.event->motherObjectId;
        break;
      }
      if (a.objectId < 0) a.objectId = target.event->motherObjectId;
    }
    (a.truePositive ? result.truePositives : result.falsePositives)++;
    result.assignments.push_back(a);
  }
  result.falseNegatives = static_cast<int>(std::count(matched.begin(), matched.end(), false));
  return result;
}

namespace {

PrPoint make_point(double threshold, const MatchCounts& c) {
  PrPoint p;
  p.threshold = threshold;
  p.recall = static_cast<double>(c.truePositives) / (c.truePositives + c.falseNegatives);
  const int kept = c.truePositives + c.falsePositives;
  p.precision = kept == 0 ? 1.0 : static_cast<double>(c.truePositives) / kept;
  return p;
}

std::vector<double> distinct_descending(std::span<const double> scores) {
  std::vector<double> t(scores.begin(), scores.end());
  std::sort(t.begin(), t.end(), std::greater<>());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace

std::vector<PrPoint> pr_curve(std::span<const double> scores,
                              const std::function<MatchCounts(std::span<const std::size_t>)>& matcher) {
  std::vector<PrPoint> curve;
  std::vector<std::size_t> kept;
  const MatchCounts empty = matcher(kept);
  if (empty.truePositives + empty.falseNegatives == 0) {
    throw Error(ErrorCode::InsufficientData, "PR curve needs at least one ground-truth object");
  }
  curve.push_back(make_point(std::numeric_limits<double>::infinity(), empty));
  for (double t : distinct_descending(scores)) {
    kept.clear();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) kept.push_back(i);
    }
    curve.push_back(make_point(t, matcher(kept)));
  }
  return curve;
}

std::vector<PrPoint> pr_curve_ranked(std::span<const double> scores,
                                     const std::vector<bool>& truePositive, int groundTruthCount) {
  if (groundTruthCount <= 0) {
    throw Error(ErrorCode::InsufficientData, "PR curve needs at least one ground-truth object");
  }
  if (scores.size() != truePositive.size()) {
    throw Error(ErrorCode::InvalidArgument, "scores and match flags differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<PrPoint> curve;
  MatchCounts c{0, 0, groundTruthCount};
  curve.push_back(make_point(std::numeric_limits<double>::infinity(), c));
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (truePositive[order[k]]) {
      ++c.truePositives;
      --c.falseNegatives;
    } else {
      ++c.falsePositives;
    }
    const double s = scores[order[k]];
    if (k + 1 == order.size() || scores[order[k + 1]] != s) curve.push_back(make_point(s, c));
  }
  return curve;
}

double auc(std::span<const PrPoint> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "AUC of an empty curve");
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dr = points[i].recall - points[i - 1].recall;
    area += 0.5 * dr * (points[i].precision + points[i - 1].precision);
  }
  return area;
}

std::vector<std::vector<std::string>> assign_folds(std::vector<std::string> movie_ids, int folds,
                                                   std::uint64_t seed) {
  std::sort(movie_ids.begin(), movie_ids.end());
  movie_ids.erase(std::unique(movie_ids.begin(), movie_ids.end()), movie_ids.end());
  if (folds <= 0) folds = static_cast<int>(movie_ids.size());
  if (folds < 2 || static_cast<int>(movie_ids.size()) < folds) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(movie_ids.size()) + " movies cannot be split into " +
                    std::to_string(folds) + " folds");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(movie_ids.begin(), movie_ids.end(), rng);
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < movie_ids.size(); ++i) out[i % folds].push_back(movie_ids[i]);
  for (auto& fold : out) std::sort(fold.begin(), fold.end());
  return out;
}

CrossValidationResult cross_validate(const std::vector<std::string>& movie_ids, int folds,
                                     std::uint64_t seed, const FoldRunner& run_fold) {
  CrossValidationResult result;
  result.testMovies = assign_folds(movie_ids, folds, seed);
  for (std::size_t f = 0; f < result.testMovies.size(); ++f) {
    std::vector<std::string> train;
    for (std::size_t g = 0; g < result.testMovies.size(); ++g) {
      if (g != f) train.insert(train.end(), result.testMovies[g].begin(), result.testMovies[g].end());
    }
    std::sort(train.begin(), train.end());
    result.folds.push_back(run_fold(train, result.testMovies[f]));
  }
  double sum = 0.0;
  for (const FoldOutcome& f : result.folds) sum += f.auc;
  result.meanAuc = sum / static_cast<double>(result.folds.size());
  return result;
}

}  // namespace hmd
