#include "hmd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hmd/error.hpp"

namespace hmd {

void SamplingParams::validate() const {
  if (!(backgroundRatio >= 0.0)) throw Error(ErrorCode::InvalidArgument, "backgroundRatio must be >= 0");
  if (!(maxDisplacement > 0.0)) throw Error(ErrorCode::InvalidArgument, "maxDisplacement must be > 0");
}

TrainingSet build_training_set(const Dataset& dataset, const SamplingParams& params) {
  params.validate();
  TrainingSet set;
  int image_id = 0;
  for (const Movie& movie : dataset.movies) {
    for (std::size_t f = 0; f < movie.frames.size(); ++f, ++image_id) {
      const MultiChannelImage& image = movie.frames[f];
      set.integrals.push_back(build_integrals(image));
      const int w = image.width(), h = image.height();
      std::vector<bool> claimed(static_cast<std::size_t>(w) * h, false);
      std::size_t fg_count = 0;

      for (ClassLabel label : kForegroundClasses) {
        for (const GroundTruthObject& obj : objects_of(movie.annotations[f], label)) {
          for (const Polygon& poly : obj.polygons) {
            double lx = w, ly = h, hx = 0, hy = 0;
            for (const Vec2& v : poly) {
              lx = std::min(lx, v.x);
              ly = std::min(ly, v.y);
              hx = std::max(hx, v.x);
              hy = std::max(hy, v.y);
            }
            for (int y = std::max(0, int(std::floor(ly))); y <= std::min(h - 1, int(std::ceil(hy))); ++y) {
              for (int x = std::max(0, int(std::floor(lx))); x <= std::min(w - 1, int(std::ceil(hx))); ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                if (claimed[i] || !point_in_polygon({double(x), double(y)}, poly)) continue;
                const Vec2 d = obj.center - Vec2{double(x), double(y)};
                if (d.norm() > params.maxDisplacement) {
                  throw Error(ErrorCode::InvalidArgument,
                              "movie " + movie.movieId + ": displacement exceeds maxDisplacement");
                }
                claimed[i] = true;
                set.samples.push_back({image_id, {x, y}, label, d});
                ++fg_count;
              }
            }
          }
        }
      }

      std::vector<std::uint32_t> background;
      for (std::size_t i = 0; i < claimed.size(); ++i) {
        if (!claimed[i]) background.push_back(static_cast<std::uint32_t>(i));
      }
      const auto wanted = std::min<std::size_t>(
          background.size(), static_cast<std::size_t>(std::llround(params.backgroundRatio * fg_count)));
      std::mt19937_64 rng(derive_seed(params.rngSeed, static_cast<std::uint64_t>(image_id)));
      // Partial Fisher-Yates: the first `wanted` entries become the sample.
      for (std::size_t k = 0; k < wanted; ++k) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(k, background.size() - 1)(rng);
        std::swap(background[k], background[j]);
        const int x = static_cast<int>(background[k] % w);
        const int y = static_cast<int>(background[k] / w);
        set.samples.push_back({image_id, {x, y}, ClassLabel::Background, {}});
      }
    }
  }
  return set;
}

}  // namespace hmd
