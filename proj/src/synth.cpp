#include "hmd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hmd/error.hpp"
#include "hmd/forest.hpp"

namespace hmd {

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (imageSize < 16) fail("synth imageSize must be >= 16");
  if (frameCount < 2) fail("synth frameCount must be >= 2");
  if (cellCount < 0) fail("synth cellCount must be >= 0");
  if (mitosisEventCount < 0) fail("synth mitosisEventCount must be >= 0");
  if (mitosisEventCount > frameCount - 1) fail("synth mitosisEventCount must be <= frameCount - 1");
  if (!(cellRadiusMin > 0.0) || cellRadiusMax < cellRadiusMin) fail("synth radii must be positive and ordered");
  if (!(motherBrightnessBoost > 0.0)) fail("synth motherBrightnessBoost must be > 0");
  if (!(noiseSigma >= 0.0)) fail("synth noiseSigma must be >= 0");
  if (!(pairDistance.sigma > 0.0) || pairDistance.mu < 0.0) fail("synth pairDistance needs mu >= 0, sigma > 0");
}

Polygon SynthCell::outline(int vertices) const {
  Polygon poly;
  const double c = std::cos(angle), s = std::sin(angle);
  for (int i = 0; i < vertices; ++i) {
    const double t = 2.0 * std::numbers::pi * i / vertices;
    const double u = semiMajor * std::cos(t);
    const double v = semiMinor * std::sin(t);
    poly.push_back({center.x + u * c - v * s, center.y + u * s + v * c});
  }
  return poly;
}

namespace {

constexpr double kMembraneWidth = 0.8;
constexpr double kMembraneBackground = 0.06;
constexpr double kNucleusBackground = 0.04;
constexpr int kMaxPlacementAttempts = 2000;

struct Disc {
  Vec2 center;
  double radius;
};

bool overlaps(const Disc& d, const std::vector<Disc>& taken, double gap) {
  return std::any_of(taken.begin(), taken.end(), [&](const Disc& o) {
    return (o.center - d.center).norm() < o.radius + d.radius + gap;
  });
}

void draw(MultiChannelImage& image, const SynthCell& cell) {
  const double reach = cell.semiMajor + 3.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(cell.center.x - reach)));
  const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(cell.center.x + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cell.center.y - reach)));
  const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(cell.center.y + reach)));
  const double c = std::cos(cell.angle), s = std::sin(cell.angle);
  const double thickness = std::min(cell.semiMajor, cell.semiMinor);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cell.center.x, dy = y - cell.center.y;
      const double u = dx * c + dy * s;
      const double v = -dx * s + dy * c;
      const double rho = std::hypot(u / cell.semiMajor, v / cell.semiMinor);
      const double ring_dist = (rho - 1.0) * thickness;
      const double ring = cell.membrane * std::exp(-0.5 * ring_dist * ring_dist / (kMembraneWidth * kMembraneWidth));
      const double nucleus = cell.nucleus / (1.0 + std::exp((rho / cell.nucleusScale - 1.0) * 8.0));
      image.at(0, x, y) = std::max(image.at(0, x, y), ring);
      image.at(1, x, y) = std::max(image.at(1, x, y), nucleus);
    }
  }
}

struct EventPlan {
  int frameT = 0;
  SynthCell mother;
  SynthCell daughterA;
  SynthCell daughterB;
  SynthCell precursor;  ///< how the mother looks before it rounds up
};

}  // namespace

SynthSequence generate_sequence(const SynthConfig& config, const std::string& movieId) {
  config.validate();
  std::mt19937_64 rng(config.rngSeed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double size = config.imageSize;
  const double two_pi = 2.0 * std::numbers::pi;

  auto base_nucleus = [&] { return uniform(0.3, 0.6); };
  auto base_membrane = [&] { return uniform(0.35, 0.65); };

  std::vector<Disc> taken;
  int next_id = 1;

  // Scripted divisions first: they need the most room.
  std::vector<EventPlan> events;
  for (int e = 0; e < config.mitosisEventCount; ++e) {
    EventPlan plan;
    plan.frameT = std::uniform_int_distribution<int>(0, config.frameCount - 2)(rng);
    const double rm = uniform(0.5 * (config.cellRadiusMin + config.cellRadiusMax), config.cellRadiusMax);
    double dist;
    do {
      dist = std::normal_distribution<double>(config.pairDistance.mu, config.pairDistance.sigma)(rng);
    } while (dist < 0.0);
    const double theta = uniform(0.0, two_pi);
    const double axis = uniform(0.0, two_pi);
    const double da = 0.75 * rm;  // along the cleavage plane
    const double db = 0.55 * rm;  // along the division axis
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Vec2 m{uniform(0.0, size), uniform(0.0, size)};
      const Vec2 mid = m + Vec2{std::cos(theta), std::sin(theta)} * dist;
      const Vec2 off = Vec2{std::cos(axis), std::sin(axis)} * (db + 0.5);
      const std::vector<Disc> parts = {{m, rm * 1.1 + 1.0}, {mid + off, da + 1.0}, {mid - off, da + 1.0}};
      auto rejected = [&](const Disc& d) {
        const bool inside = d.center.x >= d.radius && d.center.y >= d.radius &&
                            d.center.x <= size - d.radius && d.center.y <= size - d.radius;
        return !inside || overlaps(d, taken, 0.0);
      };
      if (std::any_of(parts.begin(), parts.end(), rejected)) {
        continue;
      }
      taken.insert(taken.end(), parts.begin(), parts.end());

      plan.mother = {CellKind::Mother, m, rm, rm, 0.0, base_membrane(),
                     std::min(0.95, base_nucleus() * config.motherBrightnessBoost), 0.65, next_id++};
      const int pair_id = next_id++;
      plan.daughterA = {CellKind::Daughter, mid + off, da, db, axis + std::numbers::pi / 2, base_membrane(), base_nucleus(), 0.55, pair_id};
      plan.daughterB = {CellKind::Daughter, mid - off, da, db, axis + std::numbers::pi / 2, base_membrane(), base_nucleus(), 0.55, pair_id};
      plan.precursor = {CellKind::Normal, m, rm * 1.1, rm * 0.8, uniform(0.0, two_pi), base_membrane(), base_nucleus(), 0.55, -1};
      placed = true;
    }
    if (!placed) throw Error(ErrorCode::PlacementFailed, "could not place mitosis event without overlap");
    events.push_back(plan);
  }

  // Non-dividing cells persist through the movie with per-frame jitter.
  constexpr double kJitter = 1.5;
  std::vector<SynthCell> normals;
  for (int i = 0; i < config.cellCount; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double a = uniform(config.cellRadiusMin, config.cellRadiusMax);
      const double b = a * uniform(0.6, 1.0);
      const double reach = a + 1.0;
      const Vec2 c{uniform(reach, size - reach), uniform(reach, size - reach)};
      const Disc fp{c, reach};
      if (overlaps(fp, taken, 0.0)) continue;
      taken.push_back(fp);
      normals.push_back({CellKind::Normal, c, a, b, uniform(0.0, two_pi), base_membrane(), base_nucleus(), 0.55, -1});
      placed = true;
    }
    if (!placed) throw Error(ErrorCode::PlacementFailed, "could not place cell without overlap");
  }

  SynthSequence seq;
  seq.movie.movieId = movieId;
  seq.cells.resize(config.frameCount);
  for (int f = 0; f < config.frameCount; ++f) {
    std::vector<SynthCell>& cells = seq.cells[f];
    for (SynthCell cell : normals) {
      cell.center = cell.center + Vec2{uniform(-kJitter, kJitter), uniform(-kJitter, kJitter)};
      cell.angle += uniform(-0.2, 0.2);
      cells.push_back(cell);
    }
    for (const EventPlan& e : events) {
      if (f < e.frameT) cells.push_back(e.precursor);
      if (f == e.frameT) cells.push_back(e.mother);
      if (f == e.frameT + 1) {
        cells.push_back(e.daughterA);
        cells.push_back(e.daughterB);
      }
    }

    MultiChannelImage image(config.imageSize, config.imageSize, 2);
    std::fill(image.plane(0).begin(), image.plane(0).end(), kMembraneBackground);
    std::fill(image.plane(1).begin(), image.plane(1).end(), kNucleusBackground);
    for (const SynthCell& cell : cells) draw(image, cell);
    std::normal_distribution<double> noise(0.0, config.noiseSigma);
    for (int c = 0; c < 2; ++c) {
      for (double& v : image.plane(c)) {
        if (config.noiseSigma > 0.0) v += noise(rng);
        v = std::clamp(v, 0.0, 1.0);
      }
    }
    seq.movie.frames.push_back(std::move(image));

    GroundTruthFrame gt;
    gt.frameIndex = f;
    for (const SynthCell& cell : cells) {
      if (cell.kind == CellKind::Normal) continue;
      gt.contours.push_back({cell.outline(),
                             cell.kind == CellKind::Mother ? ClassLabel::Mother : ClassLabel::Daughter,
                             cell.objectId});
    }
    seq.movie.annotations.push_back(std::move(gt));
  }
  for (const EventPlan& e : events) {
    seq.movie.events.push_back({movieId, e.frameT, e.mother.objectId, e.daughterA.objectId});
  }
  std::sort(seq.movie.events.begin(), seq.movie.events.end(),
            [](const GroundTruthEvent& a, const GroundTruthEvent& b) {
              return a.frameT != b.frameT ? a.frameT < b.frameT : a.motherObjectId < b.motherObjectId;
            });
  return seq;
}

Dataset generate_dataset(const SynthConfig& config, int movieCount) {
  Dataset ds;
  ds.channels = 2;
  for (int i = 0; i < movieCount; ++i) {
    SynthConfig c = config;
    c.rngSeed = derive_seed(config.rngSeed, static_cast<std::uint64_t>(i));
    char id[16];
    std::snprintf(id, sizeof id, "m%03d", i);
    ds.movies.push_back(generate_sequence(c, id).movie);
  }
  return ds;
}

}  // namespace hmd
