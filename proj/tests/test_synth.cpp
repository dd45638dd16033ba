#include <gtest/gtest.h>

#include <cmath>

#include "hmd/error.hpp"
#include "hmd/synth.hpp"
#include "test_util.hpp"

namespace hmd {
namespace {

SynthConfig config(std::uint64_t seed) {
  SynthConfig c;
  c.rngSeed = seed;
  return c;
}

TEST(Synth, SameSeedBitIdentical) {
  const SynthSequence a = generate_sequence(config(12));
  const SynthSequence b = generate_sequence(config(12));
  ASSERT_EQ(a.movie.frames.size(), b.movie.frames.size());
  for (std::size_t f = 0; f < a.movie.frames.size(); ++f) {
    for (int c = 0; c < 2; ++c) {
      const auto pa = a.movie.frames[f].plane(c), pb = b.movie.frames[f].plane(c);
      ASSERT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin()));
    }
    ASSERT_EQ(a.movie.annotations[f].contours.size(), b.movie.annotations[f].contours.size());
    for (std::size_t k = 0; k < a.movie.annotations[f].contours.size(); ++k) {
      ASSERT_EQ(a.movie.annotations[f].contours[k].polygon, b.movie.annotations[f].contours[k].polygon);
    }
  }
  const SynthSequence other = generate_sequence(config(13));
  const auto p0 = a.movie.frames[0].plane(0), p1 = other.movie.frames[0].plane(0);
  EXPECT_FALSE(std::equal(p0.begin(), p0.end(), p1.begin()));
}

TEST(Synth, EventCountMatchesConfig) {
  for (int k = 0; k <= 3; ++k) {
    SynthConfig c = config(4);
    c.mitosisEventCount = k;
    const SynthSequence s = generate_sequence(c);
    EXPECT_EQ(s.movie.events.size(), static_cast<std::size_t>(k));
    EXPECT_NO_THROW(validate_events(s.movie));
  }
}

TEST(Synth, InvalidConfigsRejected) {
  SynthConfig c;
  c.mitosisEventCount = c.frameCount;
  EXPECT_THROW(c.validate(), Error);
  c = SynthConfig{};
  c.cellRadiusMin = 0;
  EXPECT_THROW(c.validate(), Error);
  c = SynthConfig{};
  c.pairDistance.sigma = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Synth, OvercrowdedSceneReportsPlacementFailure) {
  SynthConfig c;
  c.imageSize = 32;
  c.cellCount = 60;
  try {
    generate_sequence(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlacementFailed);
  }
}

TEST(Synth, PairDistanceMatchesConfiguredDistribution) {
  SynthConfig c;
  c.mitosisEventCount = 2;
  std::vector<double> d;
  for (std::uint64_t seed = 0; d.size() < 200; ++seed) {
    const SynthSequence s = generate_sequence(config(1000 + seed));
    for (const GroundTruthEvent& e : s.movie.events) {
      const auto mother = find_object(s.movie.annotation(e.frameT), e.motherObjectId);
      const auto pair = find_object(s.movie.annotation(e.frameT + 1), e.daughterPairObjectId);
      d.push_back((mother->center - pair->center).norm());
    }
  }
  double mean = 0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  const double se = c.pairDistance.sigma / std::sqrt(static_cast<double>(d.size()));
  EXPECT_NEAR(mean, c.pairDistance.mu, 3 * se);
}

TEST(Synth, InvariantsOverManySeeds) {
  double mother_sum = 0, background_sum = 0;
  long mother_n = 0, background_n = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    SynthConfig c = config(seed);
    c.imageSize = 96;
    c.cellCount = 16;
    c.frameCount = 3;
    const SynthSequence s = generate_sequence(c);
    for (std::size_t f = 0; f < s.movie.frames.size(); ++f) {
      const MultiChannelImage& img = s.movie.frames[f];
      for (int ch = 0; ch < 2; ++ch) {
        for (double v : img.plane(ch)) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
      }
      ASSERT_NO_THROW(validate_frame(s.movie.annotations[f]));
      for (ClassLabel label : {ClassLabel::Mother, ClassLabel::Daughter}) {
        for (const GroundTruthObject& o : objects_of(s.movie.annotations[f], label)) {
          for (const Polygon& p : o.polygons) ASSERT_TRUE(point_in_polygon(polygon_centroid(p), p));
          ASSERT_TRUE(o.contains(o.center, RegionRule::ContoursOrHull));
          if (label == ClassLabel::Daughter) ASSERT_EQ(o.polygons.size(), 2u);
        }
      }
    }
    // Nucleus channel at mother centres against the frame's mean intensity.
    for (const GroundTruthEvent& e : s.movie.events) {
      const auto m = find_object(s.movie.annotation(e.frameT), e.motherObjectId);
      const MultiChannelImage& img = s.movie.frames[static_cast<std::size_t>(e.frameT)];
      mother_sum += img.at(1, static_cast<int>(std::lround(m->center.x)), static_cast<int>(std::lround(m->center.y)));
      ++mother_n;
      for (double v : img.plane(1)) background_sum += v;
      background_n += static_cast<long>(img.plane(1).size());
    }
  }
  ASSERT_GT(mother_n, 0);
  EXPECT_GT(mother_sum / mother_n, 2.0 * background_sum / background_n);
}

TEST(Synth, DatasetMoviesAreDistinctAndNamed) {
  SynthConfig c = config(3);
  const Dataset ds = generate_dataset(c, 3);
  ASSERT_EQ(ds.movies.size(), 3u);
  EXPECT_EQ(ds.movie_ids(), (std::vector<std::string>{"m000", "m001", "m002"}));
  for (const Movie& m : ds.movies) {
    EXPECT_EQ(m.frames.size(), 4u);
    for (const GroundTruthEvent& e : m.events) EXPECT_EQ(e.movieId, m.movieId);
  }
  const auto a = ds.movies[0].frames[0].plane(1), b = ds.movies[1].frames[0].plane(1);
  EXPECT_FALSE(std::equal(a.begin(), a.end(), b.begin()));
}

}  // namespace
}  // namespace hmd
