#include "hmd/voting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "binary_io.hpp"
#include "hmd/error.hpp"

namespace hmd {

double HoughMap::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double HoughMap::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

namespace {

struct IntVote {
  int dx;
  int dy;
};

// Leaf votes rounded once per call rather than once per pixel.
struct CompiledLeaf {
  std::array<std::vector<IntVote>, 2> votes;
  std::array<double, 2> weight{};
};

std::vector<std::vector<CompiledLeaf>> compile_votes(const HoughForestModel& model) {
  std::vector<std::vector<CompiledLeaf>> out(model.trees.size());
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const Tree& tree = model.trees[t];
    out[t].resize(tree.leaves.size());
    for (std::size_t l = 0; l < tree.leaves.size(); ++l) {
      const Leaf& leaf = tree.leaves[l];
      CompiledLeaf& c = out[t][l];
      for (ClassLabel label : kForegroundClasses) {
        const int slot = vote_slot(label);
        const auto& votes = leaf.votes[slot];
        if (votes.empty()) continue;
        c.weight[slot] = leaf.posteriors[class_index(label)] / static_cast<double>(votes.size());
        c.votes[slot].reserve(votes.size());
        for (const Vec2& v : votes) {
          c.votes[slot].push_back({static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y))});
        }
      }
    }
  }
  return out;
}

std::int32_t leaf_index(const Tree& t, std::span<const IntegralImage> integrals, Point p) {
  std::int32_t id = 0;
  while (!t.nodes[id].is_leaf()) {
    const TreeNode& n = t.nodes[id];
    id = evaluate_feature(n.feature, integrals, p) < n.threshold ? n.left : n.right;
  }
  return t.nodes[id].leaf;
}

int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

}  // namespace

HoughMaps cast_votes(const HoughForestModel& model, std::span<const IntegralImage> integrals) {
  if (integrals.size() != static_cast<std::size_t>(model.params.patch.channelCount)) {
    throw Error(ErrorCode::DimensionMismatch, "image channel count does not match the model");
  }
  const int width = integrals[0].width();
  const int height = integrals[0].height();
  HoughMaps maps{HoughMap(ClassLabel::Mother, width, height),
                 HoughMap(ClassLabel::Daughter, width, height)};
  if (!model.params.storeVotes) return maps;

  const auto compiled = compile_votes(model);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const CompiledLeaf& leaf = compiled[t][leaf_index(model.trees[t], integrals, {x, y})];
        for (int slot = 0; slot < 2; ++slot) {
          const double w = leaf.weight[slot];
          if (w == 0.0) continue;
          HoughMap& map = maps[slot];
          for (const IntVote& v : leaf.votes[slot]) {
            const int tx = x + v.dx;
            const int ty = y + v.dy;
            if (tx >= 0 && ty >= 0 && tx < width && ty < height) map.at(tx, ty) += w;
          }
        }
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(model.trees.size());
  for (HoughMap& m : maps) {
    for (double& v : m.values) v *= scale;
  }
  return maps;
}

HoughMaps cast_votes(const HoughForestModel& model, const MultiChannelImage& image) {
  const auto integrals = build_integrals(image);
  return cast_votes(model, integrals);
}

HoughMap smooth(const HoughMap& map, double sigma) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  if (sigma == 0.0) return map;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    kernel[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + r];
  }
  for (double& k : kernel) k /= sum;

  HoughMap tmp(map.label, map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += kernel[i + r] * map.at(reflect(x + i, map.width), y);
      tmp.at(x, y) = acc;
    }
  }
  HoughMap out(map.label, map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += kernel[i + r] * tmp.at(x, reflect(y + i, map.height));
      out.at(x, y) = acc;
    }
  }
  return out;
}

namespace {

void sort_detections(std::vector<Detection>& dets, int width) {
  std::sort(dets.begin(), dets.end(), [width](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.position.y * width + a.position.x < b.position.y * width + b.position.x;
  });
}

}  // namespace

std::vector<Detection> nms(const HoughMap& map, int radius, double threshold) {
  if (radius < 1) throw Error(ErrorCode::InvalidArgument, "nms radius must be >= 1");
  std::vector<IntVote> disk;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if ((dx != 0 || dy != 0) && dx * dx + dy * dy <= radius * radius) disk.push_back({dx, dy});
    }
  }
  std::vector<Detection> out;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double v = map.at(x, y);
      if (!(v > 0.0) || v < threshold) continue;
      const long self = static_cast<long>(y) * map.width + x;
      bool is_max = true;
      for (const IntVote& d : disk) {
        const int qx = x + d.dx;
        const int qy = y + d.dy;
        if (qx < 0 || qy < 0 || qx >= map.width || qy >= map.height) continue;
        const double q = map.at(qx, qy);
        if (q > v || (q == v && static_cast<long>(qy) * map.width + qx < self)) {
          is_max = false;
          break;
        }
      }
      if (is_max) out.push_back({{x, y}, v, map.label});
    }
  }
  sort_detections(out, map.width);
  return out;
}

std::array<std::vector<double>, kClassCount> posterior_maps(
    const HoughForestModel& model, std::span<const IntegralImage> integrals) {
  const int width = integrals[0].width();
  const int height = integrals[0].height();
  std::array<std::vector<double>, kClassCount> out;
  for (auto& m : out) m.assign(static_cast<std::size_t>(width) * height, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const ClassVector p = predict_posteriors(model, integrals, {x, y});
      for (int c = 0; c < kClassCount; ++c) out[c][static_cast<std::size_t>(y) * width + x] = p[c];
    }
  }
  return out;
}

std::vector<Detection> component_detections(
    const std::array<std::vector<double>, kClassCount>& posteriors, int width, int height,
    ClassLabel label) {
  const int target = class_index(label);
  const auto idx = [width](int x, int y) { return static_cast<std::size_t>(y) * width + x; };
  auto is_fg = [&](std::size_t i) {
    const double p = posteriors[target][i];
    for (int c = 0; c < kClassCount; ++c) {
      if (c == target) continue;
      // Ties go to the lower class index.
      if (posteriors[c][i] > p || (posteriors[c][i] == p && c < target)) return false;
    }
    return true;
  };

  std::vector<int> component(static_cast<std::size_t>(width) * height, -1);
  std::vector<Detection> out;
  std::vector<Point> stack;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (component[idx(x, y)] >= 0 || !is_fg(idx(x, y))) continue;
      const int id = static_cast<int>(out.size());
      double sx = 0.0, sy = 0.0, mass = 0.0;
      long count = 0;
      stack.push_back({x, y});
      component[idx(x, y)] = id;
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        sx += p.x;
        sy += p.y;
        mass += posteriors[target][idx(p.x, p.y)];
        ++count;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int qx = p.x + dx;
            const int qy = p.y + dy;
            if (qx < 0 || qy < 0 || qx >= width || qy >= height) continue;
            if (component[idx(qx, qy)] >= 0 || !is_fg(idx(qx, qy))) continue;
            component[idx(qx, qy)] = id;
            stack.push_back({qx, qy});
          }
        }
      }
      const Point centroid{static_cast<int>(std::lround(sx / count)),
                           static_cast<int>(std::lround(sy / count))};
      out.push_back({centroid, mass, label});
    }
  }
  sort_detections(out, width);
  return out;
}

void save_hough_pgm(const HoughMap& map, const std::filesystem::path& path) {
  const double peak = map.max();
  std::vector<double> scaled(map.values.size(), 0.0);
  if (peak > 0.0) {
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = map.values[i] / peak;
  }
  write_pgm(path, scaled, map.width, map.height, 255);
}

void save_hough_raw(const HoughMap& map, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes("HMDH");
  w.u32(kHoughRawVersion);
  w.u8(static_cast<std::uint8_t>(map.label));
  w.u32(static_cast<std::uint32_t>(map.width));
  w.u32(static_cast<std::uint32_t>(map.height));
  for (double v : map.values) w.f64(v);
  const auto bytes = w.take();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

HoughMap load_hough_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  detail::ByteReader r(bytes);
  if (r.bytes(4) != "HMDH") throw Error(ErrorCode::CorruptFile, "not a Hough map file");
  if (r.u32() != kHoughRawVersion) throw Error(ErrorCode::VersionMismatch, "Hough map version");
  const std::uint8_t label = r.u8();
  if (label < 1 || label > 2) throw Error(ErrorCode::CorruptFile, "bad Hough map class");
  const auto width = static_cast<int>(r.u32());
  const auto height = static_cast<int>(r.u32());
  if (width < 1 || height < 1 ||
      r.remaining() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 8) {
    throw Error(ErrorCode::CorruptFile, "Hough map size mismatch");
  }
  HoughMap map(static_cast<ClassLabel>(label), width, height);
  for (double& v : map.values) v = r.f64();
  return map;
}

}  // namespace hmd
