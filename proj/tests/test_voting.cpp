#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "hmd/error.hpp"
#include "hmd/voting.hpp"
#include "test_util.hpp"

namespace hmd {
namespace {

Leaf make_leaf(ClassVector posteriors, std::vector<Vec2> mother, std::vector<Vec2> daughter) {
  Leaf l;
  l.posteriors = posteriors;
  l.rawCounts = posteriors;
  l.votes = {std::move(mother), std::move(daughter)};
  return l;
}

HoughForestModel single_leaf_model(Leaf leaf, int trees = 1) {
  HoughForestModel m;
  m.params.patch = {2, 2};
  for (int t = 0; t < trees; ++t) {
    Tree tree;
    tree.nodes.push_back({{}, 0.0, -1, -1, 0});
    tree.leaves.push_back(leaf);
    m.trees.push_back(tree);
  }
  return m;
}

// Random tree with up to `depth` levels, random features and random leaves.
void grow(Tree& t, std::mt19937_64& rng, const PatchSpec& patch, int depth) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto id = static_cast<std::int32_t>(t.nodes.size());
  t.nodes.emplace_back();
  if (depth == 0 || u(rng) < 0.2) {
    ClassVector p{u(rng), u(rng), u(rng)};
    const double s = p[0] + p[1] + p[2];
    for (double& v : p) v /= s;
    Leaf leaf;
    leaf.posteriors = p;
    for (auto& votes : leaf.votes) {
      const int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) votes.push_back({u(rng) * 12 - 6, u(rng) * 12 - 6});
    }
    t.nodes[id].leaf = static_cast<std::int32_t>(t.leaves.size());
    t.leaves.push_back(leaf);
    return;
  }
  t.nodes[id].feature = sample_feature(rng, patch);
  t.nodes[id].threshold = u(rng) * 0.8 - 0.2;
  const auto left = static_cast<std::int32_t>(t.nodes.size());
  grow(t, rng, patch, depth - 1);
  const auto right = static_cast<std::int32_t>(t.nodes.size());
  grow(t, rng, patch, depth - 1);
  t.nodes[id].left = left;
  t.nodes[id].right = right;
}

HoughForestModel random_model(std::mt19937_64& rng) {
  HoughForestModel m;
  m.params.patch = {3, 2};
  const int trees = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < trees; ++i) {
    Tree t;
    grow(t, rng, m.params.patch, 3);
    m.trees.push_back(std::move(t));
  }
  return m;
}

// Accumulator oracle: brute-force features for traversal, per-vote adds.
HoughMaps brute_votes(const HoughForestModel& m, const MultiChannelImage& img, double* in_bounds) {
  HoughMaps maps{HoughMap(ClassLabel::Mother, img.width(), img.height()),
                 HoughMap(ClassLabel::Daughter, img.width(), img.height())};
  *in_bounds = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (const Tree& t : m.trees) {
        int id = 0;
        while (t.nodes[id].leaf < 0) {
          const TreeNode& n = t.nodes[id];
          id = test::brute_feature(n.feature, img, {x, y}) < n.threshold ? n.left : n.right;
        }
        const Leaf& leaf = t.leaves[t.nodes[id].leaf];
        for (int slot = 0; slot < 2; ++slot) {
          for (const Vec2& v : leaf.votes[slot]) {
            const int tx = x + static_cast<int>(std::round(v.x));
            const int ty = y + static_cast<int>(std::round(v.y));
            if (tx < 0 || ty < 0 || tx >= img.width() || ty >= img.height()) continue;
            const double w = leaf.posteriors[slot + 1] / static_cast<double>(leaf.votes[slot].size());
            maps[slot].at(tx, ty) += w / static_cast<double>(m.trees.size());
            *in_bounds += w / static_cast<double>(m.trees.size());
          }
        }
      }
    }
  }
  return maps;
}

TEST(CastVotes, BackgroundOnlyModelGivesZeroMaps) {
  std::mt19937_64 rng(1);
  const auto maps = cast_votes(single_leaf_model(make_leaf({1, 0, 0}, {}, {})), test::random_image(rng, 9, 7));
  for (const HoughMap& m : maps) EXPECT_EQ(m.total(), 0.0);
}

TEST(CastVotes, SingleVoteLandsAtOffset) {
  // A one-pixel image reaching a leaf with mother posterior 1 and vote (0,0) -> 1 at that pixel.
  MultiChannelImage img(1, 1, 2);
  const auto maps = cast_votes(single_leaf_model(make_leaf({0, 1, 0}, {{0, 0}}, {})), img);
  EXPECT_EQ(maps[0].at(0, 0), 1.0);
  EXPECT_EQ(maps[1].at(0, 0), 0.0);

  // On a wider image every pixel votes one step right: column 0 stays empty.
  MultiChannelImage wide(5, 3, 2);
  const auto shifted = cast_votes(single_leaf_model(make_leaf({0, 1, 0}, {{1, 0}}, {})), wide);
  for (int y = 0; y < 3; ++y) {
    EXPECT_EQ(shifted[0].at(0, y), 0.0);
    for (int x = 1; x < 5; ++x) EXPECT_EQ(shifted[0].at(x, y), 1.0);
  }
}

TEST(CastVotes, OutOfImageVotesDropped) {
  MultiChannelImage img(4, 4, 2);
  const auto maps = cast_votes(single_leaf_model(make_leaf({0, 0.5, 0.5}, {{100, 0}}, {{0, -50}})), img);
  EXPECT_EQ(maps[0].total(), 0.0);
  EXPECT_EQ(maps[1].total(), 0.0);
}

TEST(CastVotes, NormalizedByTreeCount) {
  MultiChannelImage img(3, 3, 2);
  const Leaf leaf = make_leaf({0.2, 0.8, 0}, {{0, 0}, {0, 0}}, {});
  const auto one = cast_votes(single_leaf_model(leaf, 1), img);
  const auto four = cast_votes(single_leaf_model(leaf, 4), img);
  for (std::size_t i = 0; i < one[0].values.size(); ++i) {
    EXPECT_NEAR(one[0].values[i], 0.8, 1e-15);
    EXPECT_NEAR(four[0].values[i], 0.8, 1e-15);
  }
}

TEST(CastVotes, ChannelMismatchThrows) {
  MultiChannelImage img(3, 3, 1);
  try {
    cast_votes(single_leaf_model(make_leaf({0, 1, 0}, {{0, 0}}, {})), img);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(CastVotes, MatchesBruteForceAccumulatorAndConservesMass) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const HoughForestModel model = random_model(rng);
    const auto img = test::random_image(rng, 4 + static_cast<int>(rng() % 10), 4 + static_cast<int>(rng() % 10));
    double mass = 0.0;
    const HoughMaps expected = brute_votes(model, img, &mass);
    const HoughMaps got = cast_votes(model, img);
    for (int slot = 0; slot < 2; ++slot) {
      ASSERT_EQ(got[slot].width, img.width());
      for (std::size_t i = 0; i < got[slot].values.size(); ++i) {
        ASSERT_GE(got[slot].values[i], 0.0);
        ASSERT_NEAR(got[slot].values[i], expected[slot].values[i], 1e-9) << "trial " << trial;
      }
    }
    ASSERT_NEAR(got[0].total() + got[1].total(), mass, 1e-9);
  }
}

// ---- smoothing --------------------------------------------------------------

int mirror(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

HoughMap direct_convolution(const HoughMap& m, double sigma) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  double norm = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) norm += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
  HoughMap out(m.label, m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          acc += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) *
                 m.at(mirror(x + dx, m.width), mirror(y + dy, m.height));
        }
      }
      out.at(x, y) = acc / norm;
    }
  }
  return out;
}

TEST(Smooth, ZeroSigmaIsIdentity) {
  std::mt19937_64 rng(4);
  HoughMap m(ClassLabel::Mother, 6, 5);
  for (double& v : m.values) v = static_cast<double>(rng() % 100);
  EXPECT_EQ(smooth(m, 0.0).values, m.values);
  EXPECT_THROW(smooth(m, -1.0), Error);
}

TEST(Smooth, ConstantStaysConstant) {
  HoughMap m(ClassLabel::Daughter, 11, 7);
  for (double& v : m.values) v = 2.5;
  for (double v : smooth(m, 3.0).values) EXPECT_NEAR(v, 2.5, 1e-12);
}

TEST(Smooth, ImpulseGivesKernelAndKeepsMass) {
  HoughMap m(ClassLabel::Mother, 21, 21);
  m.at(10, 10) = 1.0;
  const HoughMap s = smooth(m, 2.0);
  EXPECT_NEAR(s.total(), 1.0, 1e-6);
  double k0 = 0.0;
  for (int i = -6; i <= 6; ++i) k0 += std::exp(-i * i / 8.0);
  EXPECT_NEAR(s.at(10, 10), 1.0 / (k0 * k0), 1e-12);
  EXPECT_NEAR(s.at(12, 10), std::exp(-0.5) / (k0 * k0), 1e-12);
  EXPECT_NEAR(s.at(11, 9), s.at(9, 11), 1e-15);
}

TEST(Smooth, MatchesDirectConvolution) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    HoughMap m(ClassLabel::Mother, 3 + static_cast<int>(rng() % 12), 3 + static_cast<int>(rng() % 12));
    for (double& v : m.values) v = u(rng) < 0.3 ? u(rng) : 0.0;
    const double sigma = 0.3 + 2.5 * u(rng);
    // Mirroring needs the kernel radius to stay within one reflection.
    if (std::ceil(3 * sigma) > std::min(m.width, m.height)) continue;
    const HoughMap got = smooth(m, sigma);
    const HoughMap want = direct_convolution(m, sigma);
    for (std::size_t i = 0; i < m.values.size(); ++i) ASSERT_NEAR(got.values[i], want.values[i], 1e-12);
    ASSERT_NEAR(got.total(), m.total(), 1e-9);
  }
}

// ---- NMS ---------------------------------------------------------------------

TEST(Nms, SingleGlobalPeak) {
  HoughMap m(ClassLabel::Mother, 15, 15);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 15; ++x) m.at(x, y) = 10.0 - std::hypot(x - 6, y - 9) * 0.1;
  const auto d = nms(m, 20, 1.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].position, (Point{6, 9}));
  EXPECT_EQ(d[0].score, 10.0);
  EXPECT_EQ(d[0].label, ClassLabel::Mother);
}

TEST(Nms, CloseWeakerPeakSuppressed) {
  HoughMap m(ClassLabel::Daughter, 20, 10);
  m.at(5, 5) = 3.0;
  m.at(8, 5) = 2.0;
  const auto d = nms(m, 5, 0.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].position, (Point{5, 5}));
  EXPECT_EQ(nms(m, 2, 0.0).size(), 2u);
}

TEST(Nms, BelowThresholdIsEmpty) {
  HoughMap m(ClassLabel::Mother, 8, 8);
  m.at(2, 2) = 0.4;
  EXPECT_TRUE(nms(m, 3, 0.5).empty());
  EXPECT_TRUE(nms(HoughMap(ClassLabel::Mother, 8, 8), 3, 0.0).empty());
  EXPECT_THROW(nms(m, 0, 0.0), Error);
}

TEST(Nms, PlateauKeepsFirstRowMajor) {
  HoughMap m(ClassLabel::Mother, 6, 6);
  m.at(2, 3) = 1.0;
  m.at(3, 3) = 1.0;
  const auto d = nms(m, 2, 0.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].position, (Point{2, 3}));
}

TEST(Nms, PropertiesOnRandomMaps) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    HoughMap raw(ClassLabel::Mother, 10 + static_cast<int>(rng() % 30), 10 + static_cast<int>(rng() % 30));
    for (double& v : raw.values) v = u(rng) < 0.05 ? u(rng) : 0.0;
    // Quantized values exercise ties.
    for (double& v : raw.values) v = std::round(v * 20) / 20;
    const HoughMap m = trial % 2 ? smooth(raw, 1.5) : raw;
    const int radius = 1 + static_cast<int>(rng() % 8);
    const double hi = u(rng) * m.max(), lo = hi * u(rng);
    const auto strict = nms(m, radius, hi);
    const auto loose = nms(m, radius, lo);
    for (std::size_t i = 0; i < loose.size(); ++i) {
      const Detection& a = loose[i];
      ASSERT_GT(a.score, 0.0);
      ASSERT_GE(a.score, lo);
      ASSERT_EQ(a.score, m.at(a.position.x, a.position.y));
      if (i > 0) ASSERT_GE(loose[i - 1].score, a.score);
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int x = a.position.x + dx, y = a.position.y + dy;
          if (dx * dx + dy * dy > radius * radius || x < 0 || y < 0 || x >= m.width || y >= m.height) continue;
          ASSERT_LE(m.at(x, y), a.score);
        }
      }
      for (std::size_t j = i + 1; j < loose.size(); ++j) {
        const double dx = a.position.x - loose[j].position.x, dy = a.position.y - loose[j].position.y;
        ASSERT_GT(dx * dx + dy * dy, static_cast<double>(radius * radius));
      }
    }
    // Monotone candidate sets: the strict result is a prefix of the loose one.
    ASSERT_LE(strict.size(), loose.size());
    for (std::size_t i = 0; i < strict.size(); ++i) ASSERT_EQ(strict[i], loose[i]);
  }
}

// ---- classification-only detections ------------------------------------------

TEST(ComponentDetections, TwoBlobs) {
  const int w = 10, h = 6;
  std::array<std::vector<double>, kClassCount> post;
  for (auto& p : post) p.assign(w * h, 0.0);
  for (int i = 0; i < w * h; ++i) post[0][i] = 1.0;
  auto set = [&](int x, int y, double m) {
    post[0][y * w + x] = 1 - m;
    post[1][y * w + x] = m;
  };
  set(1, 1, 0.9); set(2, 1, 0.9); set(1, 2, 0.9); set(2, 2, 0.9);
  set(7, 4, 0.6); set(8, 3, 0.6);  // diagonal neighbours form one component
  const auto d = component_detections(post, w, h, ClassLabel::Mother);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].position, (Point{2, 2}));  // centroid (1.5, 1.5) rounds away from zero
  EXPECT_NEAR(d[0].score, 3.6, 1e-12);
  EXPECT_EQ(d[1].position, (Point{8, 4}));
  EXPECT_NEAR(d[1].score, 1.2, 1e-12);
  EXPECT_TRUE(component_detections(post, w, h, ClassLabel::Daughter).empty());
}

// ---- export ----------------------------------------------------------------

TEST(HoughExport, RawRoundTripAndErrors) {
  std::mt19937_64 rng(2);
  HoughMap m(ClassLabel::Daughter, 7, 5);
  for (double& v : m.values) v = static_cast<double>(rng() % 1000) / 7.0;
  const auto dir = test::temp_dir("hough_raw");
  save_hough_raw(m, dir / "m.raw");
  const HoughMap back = load_hough_raw(dir / "m.raw");
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.label, ClassLabel::Daughter);
  EXPECT_EQ(std::filesystem::file_size(dir / "m.raw"), 4u + 4 + 1 + 4 + 4 + 7 * 5 * 8);

  std::filesystem::resize_file(dir / "m.raw", 30);
  EXPECT_THROW(load_hough_raw(dir / "m.raw"), Error);
  EXPECT_THROW(load_hough_raw(dir / "missing.raw"), Error);

  save_hough_pgm(m, dir / "m.pgm");
  int w = 0, h = 0;
  const auto pixels = read_pgm(dir / "m.pgm", w, h);
  EXPECT_EQ(w, 7);
  EXPECT_NEAR(*std::max_element(pixels.begin(), pixels.end()), 1.0, 1e-12);
}

}  // namespace
}  // namespace hmd
