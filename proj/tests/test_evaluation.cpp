#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "hmd/error.hpp"
#include "hmd/evaluation.hpp"

namespace hmd {
namespace {

Polygon square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
}

Detection det(int x, int y, double score) { return {{x, y}, score, ClassLabel::Mother}; }

GroundTruthFrame one_square_frame() {
  GroundTruthFrame f;
  f.contours.push_back({square(0, 0, 10), ClassLabel::Mother, 1});
  return f;
}

TEST(MatchDetections, OneInsideIsTruePositive) {
  const std::vector<Detection> d{det(5, 5, 1.0)};
  const MatchResult r = match_detections(d, one_square_frame(), ClassLabel::Mother);
  EXPECT_EQ(r.truePositives, 1);
  EXPECT_EQ(r.falsePositives, 0);
  EXPECT_EQ(r.falseNegatives, 0);
  EXPECT_EQ(r.assignments[0].objectId, 1);
}

TEST(MatchDetections, DuplicateInsideIsFalsePositive) {
  const std::vector<Detection> d{det(3, 3, 0.4), det(5, 5, 0.9)};
  const MatchResult r = match_detections(d, one_square_frame(), ClassLabel::Mother);
  EXPECT_EQ(r.truePositives, 1);
  EXPECT_EQ(r.falsePositives, 1);
  // The higher-scoring detection is the TP even though it came second.
  EXPECT_EQ(r.assignments[0].item, 1u);
  EXPECT_TRUE(r.assignments[0].truePositive);
}

TEST(MatchDetections, OutsideDetectionAndMissedContour) {
  const std::vector<Detection> d{det(50, 50, 1.0)};
  const MatchResult r = match_detections(d, one_square_frame(), ClassLabel::Mother);
  EXPECT_EQ(r.truePositives, 0);
  EXPECT_EQ(r.falsePositives, 1);
  EXPECT_EQ(r.falseNegatives, 1);
}

TEST(MatchDetections, OtherClassContoursDoNotCount) {
  const std::vector<Detection> d{det(5, 5, 1.0)};
  const MatchResult r = match_detections(d, one_square_frame(), ClassLabel::Daughter);
  EXPECT_EQ(r.truePositives, 0);
  EXPECT_EQ(r.falsePositives, 1);
  EXPECT_EQ(r.falseNegatives, 0);
}

TEST(MatchDetections, BoundaryPointCountsAsInside) {
  const std::vector<Detection> d{det(10, 4, 1.0)};
  EXPECT_EQ(match_detections(d, one_square_frame(), ClassLabel::Mother).truePositives, 1);
}

TEST(MatchDetections, DaughterPairHullRule) {
  GroundTruthFrame f;
  f.contours.push_back({square(0, 0, 4), ClassLabel::Daughter, 7});
  f.contours.push_back({square(10, 0, 4), ClassLabel::Daughter, 7});
  const std::vector<Detection> mid{{{7, 2}, 1.0, ClassLabel::Daughter}};
  EXPECT_EQ(match_detections(mid, f, ClassLabel::Daughter, RegionRule::ContoursOrHull).truePositives, 1);
  EXPECT_EQ(match_detections(mid, f, ClassLabel::Daughter, RegionRule::EitherContour).truePositives, 0);
  // Two detections on the two halves of one pair: one TP, one FP.
  const std::vector<Detection> both{{{2, 2}, 0.8, ClassLabel::Daughter}, {{12, 2}, 0.7, ClassLabel::Daughter}};
  const MatchResult r = match_detections(both, f, ClassLabel::Daughter, RegionRule::EitherContour);
  EXPECT_EQ(r.truePositives, 1);
  EXPECT_EQ(r.falsePositives, 1);
}

// Random frames of disjoint squares; an oracle written from the rule text.
struct Scene {
  GroundTruthFrame frame;
  std::vector<Polygon> squares;
  std::vector<Detection> dets;
};

Scene random_scene(std::mt19937_64& rng) {
  Scene s;
  const int grid = 1 + static_cast<int>(rng() % 5);
  int id = 0;
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      if (rng() % 3 == 0) continue;
      s.squares.push_back(square(gx * 12, gy * 12, 8));
      s.frame.contours.push_back({s.squares.back(), ClassLabel::Mother, ++id});
    }
  }
  const int n = static_cast<int>(rng() % 25);
  for (int i = 0; i < n; ++i) {
    // Quantized scores create ties.
    s.dets.push_back(det(static_cast<int>(rng() % (grid * 12)), static_cast<int>(rng() % (grid * 12)),
                         static_cast<double>(1 + rng() % 6) / 6));
  }
  return s;
}

bool inside_square(const Polygon& sq, Point p) {
  return p.x >= sq[0].x && p.x <= sq[1].x && p.y >= sq[0].y && p.y <= sq[2].y;
}

MatchCounts oracle_counts(const Scene& s, std::span<const std::size_t> kept) {
  MatchCounts c{};
  std::vector<bool> hit(s.squares.size(), false);
  for (std::size_t i : kept) {
    bool any = false;
    for (std::size_t o = 0; o < s.squares.size(); ++o) {
      if (inside_square(s.squares[o], s.dets[i].position)) hit[o] = any = true;
    }
    if (!any) ++c.falsePositives;
  }
  c.truePositives = static_cast<int>(std::count(hit.begin(), hit.end(), true));
  c.falseNegatives = static_cast<int>(s.squares.size()) - c.truePositives;
  int inside = 0;
  for (std::size_t i : kept) {
    for (const Polygon& sq : s.squares) inside += inside_square(sq, s.dets[i].position);
  }
  c.falsePositives += inside - c.truePositives;
  return c;
}

TEST(MatchDetections, RandomScenesAgreeWithOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    Scene s = random_scene(rng);
    std::vector<std::size_t> all(s.dets.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const MatchCounts want = oracle_counts(s, all);
    const MatchResult got = match_detections(s.dets, s.frame, ClassLabel::Mother);
    ASSERT_EQ(got.truePositives, want.truePositives);
    ASSERT_EQ(got.falsePositives, want.falsePositives);
    ASSERT_EQ(got.falseNegatives, want.falseNegatives);
    ASSERT_EQ(got.truePositives + got.falseNegatives, static_cast<int>(s.squares.size()));
    ASSERT_EQ(got.truePositives + got.falsePositives, static_cast<int>(s.dets.size()));

    // The TP of each square is its best-ranked inside detection.
    for (const Assignment& a : got.assignments) {
      if (!a.truePositive) continue;
      const Detection& d = s.dets[a.item];
      for (const Detection& other : s.dets) {
        const Polygon& sq = s.squares[static_cast<std::size_t>(a.objectId - 1)];
        if (!inside_square(sq, other.position) || &other == &d) continue;
        const bool better = other.score > d.score ||
                            (other.score == d.score && std::tie(other.position.y, other.position.x) <
                                                           std::tie(d.position.y, d.position.x));
        ASSERT_FALSE(better);
      }
    }

    // Input order among any detections does not change the result.
    std::shuffle(s.dets.begin(), s.dets.end(), rng);
    const MatchResult again = match_detections(s.dets, s.frame, ClassLabel::Mother);
    ASSERT_EQ(again.truePositives, got.truePositives);
    ASSERT_EQ(again.falsePositives, got.falsePositives);
  }
}

// ---- mitosis matching ------------------------------------------------------------

struct MitosisFixture {
  std::map<int, GroundTruthFrame> frames;
  std::vector<GroundTruthEvent> events;
  FrameLookup lookup() const {
    return [this](const std::string&, int f) -> const GroundTruthFrame& { return frames.at(f); };
  }
};

MitosisFixture mitosis_fixture() {
  MitosisFixture fx;
  fx.frames[0].frameIndex = 0;
  fx.frames[0].contours.push_back({square(0, 0, 10), ClassLabel::Mother, 1});
  fx.frames[1].frameIndex = 1;
  fx.frames[1].contours.push_back({square(0, 20, 4), ClassLabel::Daughter, 2});
  fx.frames[1].contours.push_back({square(10, 20, 4), ClassLabel::Daughter, 2});
  fx.events.push_back({"m", 0, 1, 2});
  return fx;
}

TEST(MatchMitosis, BothInsideIsTruePositive) {
  const MitosisFixture fx = mitosis_fixture();
  const std::vector<ScoredEvent> e{{"m", 0, {5, 5}, {2, 22}, 1.0}};
  const MatchResult r = match_mitosis(e, fx.events, fx.lookup());
  EXPECT_EQ(r.truePositives, 1);
  EXPECT_EQ(r.falseNegatives, 0);
}

TEST(MatchMitosis, DaughterOutsideIsFalsePositive) {
  const MitosisFixture fx = mitosis_fixture();
  const std::vector<ScoredEvent> e{{"m", 0, {5, 5}, {40, 40}, 1.0}};
  const MatchResult r = match_mitosis(e, fx.events, fx.lookup());
  EXPECT_EQ(r.truePositives, 0);
  EXPECT_EQ(r.falsePositives, 1);
  EXPECT_EQ(r.falseNegatives, 1);
}

TEST(MatchMitosis, UnmatchedEventIsFalseNegative) {
  const MitosisFixture fx = mitosis_fixture();
  const MatchResult r = match_mitosis({}, fx.events, fx.lookup());
  EXPECT_EQ(r.falseNegatives, 1);
  EXPECT_EQ(r.truePositives + r.falsePositives, 0);
}

TEST(MatchMitosis, DuplicatesWrongFrameAndHull) {
  const MitosisFixture fx = mitosis_fixture();
  const std::vector<ScoredEvent> e{
      {"m", 0, {5, 5}, {7, 22}, 0.9},   // midpoint between the daughters: hull only
      {"m", 0, {4, 4}, {12, 22}, 0.5},  // duplicate
      {"m", 1, {5, 5}, {2, 22}, 0.7},   // wrong frame
  };
  const MatchResult hull = match_mitosis(e, fx.events, fx.lookup(), RegionRule::ContoursOrHull);
  EXPECT_EQ(hull.truePositives, 1);
  EXPECT_EQ(hull.falsePositives, 2);
  EXPECT_EQ(hull.assignments[0].item, 0u);
  const MatchResult strict = match_mitosis(e, fx.events, fx.lookup(), RegionRule::EitherContour);
  EXPECT_EQ(strict.truePositives, 1);
  EXPECT_EQ(strict.assignments[0].truePositive, false);
  // Processing order is by score: items 0, 2, 1.
  EXPECT_EQ(strict.assignments[2].item, 1u);
  EXPECT_TRUE(strict.assignments[2].truePositive);
}

// ---- PR curves -------------------------------------------------------------------

TEST(PrCurve, TwoObjectsTpThenFp) {
  const std::vector<double> scores{0.9, 0.8};
  const std::vector<bool> tp{true, false};
  const auto curve = pr_curve_ranked(scores, tp, 2);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_TRUE(std::isinf(curve[0].threshold));
  EXPECT_EQ(curve[0].recall, 0.0);
  EXPECT_EQ(curve[0].precision, 1.0);
  EXPECT_EQ(curve[1].recall, 0.5);
  EXPECT_EQ(curve[1].precision, 1.0);
  EXPECT_EQ(curve[2].recall, 0.5);
  EXPECT_EQ(curve[2].precision, 0.5);

  const auto generic = pr_curve(scores, [&](std::span<const std::size_t> kept) {
    MatchCounts c{0, 0, 2};
    for (std::size_t i : kept) tp[i] ? (++c.truePositives, --c.falseNegatives) : ++c.falsePositives;
    return c;
  });
  ASSERT_EQ(generic.size(), curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_EQ(generic[i].recall, curve[i].recall);
    EXPECT_EQ(generic[i].precision, curve[i].precision);
  }
}

TEST(PrCurve, EmptyDetectionsAndPerfectDetector) {
  const auto empty = pr_curve_ranked({}, {}, 3);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0].recall, 0.0);
  EXPECT_EQ(empty[0].precision, 1.0);
  EXPECT_EQ(auc(empty), 0.0);

  const std::vector<double> scores{0.9, 0.7, 0.4};
  const auto perfect = pr_curve_ranked(scores, {true, true, true}, 3);
  for (const PrPoint& p : perfect) EXPECT_EQ(p.precision, 1.0);
  EXPECT_EQ(perfect.back().recall, 1.0);
  EXPECT_DOUBLE_EQ(auc(perfect), 1.0);
}

TEST(PrCurve, NoGroundTruthThrows) {
  EXPECT_THROW(pr_curve_ranked({}, {}, 0), Error);
  EXPECT_THROW(pr_curve({}, [](std::span<const std::size_t>) { return MatchCounts{}; }), Error);
}

TEST(Auc, Examples) {
  const std::vector<PrPoint> flat{{1, 0, 1}, {0.5, 1, 1}};
  EXPECT_DOUBLE_EQ(auc(flat), 1.0);
  const std::vector<PrPoint> diag{{1, 0, 1}, {0.5, 1, 0}};
  EXPECT_DOUBLE_EQ(auc(diag), 0.5);
  const std::vector<PrPoint> single{{1, 0, 0.3}};
  EXPECT_EQ(auc(single), 0.0);
  EXPECT_THROW(auc(std::vector<PrPoint>{}), Error);
}

TEST(PrCurve, RankedRouteEqualsRematchingAndIsWellFormed) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 500; ++trial) {
    const Scene s = random_scene(rng);
    if (s.squares.empty()) continue;
    std::vector<double> scores;
    for (const Detection& d : s.dets) scores.push_back(d.score);
    const auto generic = pr_curve(scores, [&](std::span<const std::size_t> kept) {
      std::vector<Detection> subset;
      for (std::size_t i : kept) subset.push_back(s.dets[i]);
      const MatchResult r = match_detections(subset, s.frame, ClassLabel::Mother);
      const MatchCounts c{r.truePositives, r.falsePositives, r.falseNegatives};
      const MatchCounts o = oracle_counts(s, kept);
      EXPECT_EQ(c.truePositives, o.truePositives);
      EXPECT_EQ(c.falsePositives, o.falsePositives);
      return c;
    });
    const MatchResult all = match_detections(s.dets, s.frame, ClassLabel::Mother);
    std::vector<bool> tp(s.dets.size(), false);
    for (const Assignment& a : all.assignments) tp[a.item] = a.truePositive;
    const auto ranked = pr_curve_ranked(scores, tp, static_cast<int>(s.squares.size()));
    ASSERT_EQ(generic.size(), ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      ASSERT_EQ(generic[i].threshold, ranked[i].threshold);
      ASSERT_EQ(generic[i].recall, ranked[i].recall);
      ASSERT_EQ(generic[i].precision, ranked[i].precision);
      if (i > 0) {
        ASSERT_GE(ranked[i].recall, ranked[i - 1].recall);
        ASSERT_LT(ranked[i].threshold, ranked[i - 1].threshold);
      }
    }
    const double a = auc(ranked);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
  }
}

// ---- folds -----------------------------------------------------------------------

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("m" + std::to_string(100 + i));
  return out;
}

TEST(Folds, FiveMoviesFiveFolds) {
  const auto folds = assign_folds(ids(5), 5, 3);
  ASSERT_EQ(folds.size(), 5u);
  for (const auto& f : folds) EXPECT_EQ(f.size(), 1u);
}

TEST(Folds, ReproduciblePartitionAndLeaveOneOut) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const int k = rng() % 4 == 0 ? 0 : 2 + static_cast<int>(rng() % (n - 1));
    const std::uint64_t seed = rng();
    auto movies = ids(n);
    const auto a = assign_folds(movies, k, seed);
    std::shuffle(movies.begin(), movies.end(), rng);
    ASSERT_EQ(assign_folds(movies, k, seed), a);
    ASSERT_EQ(a.size(), static_cast<std::size_t>(k == 0 ? n : k));
    std::vector<std::string> seen;
    for (const auto& f : a) {
      ASSERT_FALSE(f.empty());
      seen.insert(seen.end(), f.begin(), f.end());
    }
    std::sort(seen.begin(), seen.end());
    ASSERT_EQ(seen, ids(n));
  }
}

TEST(Folds, TooFewMoviesThrows) {
  EXPECT_THROW(assign_folds(ids(3), 5, 1), Error);
  EXPECT_THROW(assign_folds(ids(1), 0, 1), Error);
}

TEST(CrossValidate, MeanOfFoldsAndDisjointTraining) {
  const auto movies = ids(7);
  int calls = 0;
  const auto r = cross_validate(movies, 3, 5, [&](const auto& train, const auto& test) {
    for (const auto& t : test) EXPECT_EQ(std::count(train.begin(), train.end(), t), 0);
    EXPECT_EQ(train.size() + test.size(), movies.size());
    return FoldOutcome{0.1 * ++calls, {}};
  });
  ASSERT_EQ(r.folds.size(), 3u);
  EXPECT_DOUBLE_EQ(r.meanAuc, (0.1 + 0.2 + 0.3) / 3);
}

}  // namespace
}  // namespace hmd
