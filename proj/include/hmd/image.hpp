#pragma once

#include <cstddef>
#include <algorithm>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hmd {

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  long area() const { return empty() ? 0 : static_cast<long>(width()) * height(); }
  Rect translated(int dx, int dy) const { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }
  Rect clipped(int width, int height) const {
    const Rect r{std::max(x0, 0), std::max(y0, 0), std::min(x1, width), std::min(y1, height)};
    return r.empty() ? Rect{} : r;
  }
  bool operator==(const Rect&) const = default;
};

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

/// Channel-major stack of equally sized intensity planes, values in [0,1].
class MultiChannelImage {
 public:
  MultiChannelImage() = default;
  MultiChannelImage(int width, int height, int channels = 2);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double at(int channel, int x, int y) const {
    return data_[plane_offset(channel) + static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int channel, int x, int y) {
    return data_[plane_offset(channel) + static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const double> plane(int channel) const {
    return {data_.data() + plane_offset(channel), static_cast<std::size_t>(width_) * height_};
  }
  std::span<double> plane(int channel) {
    return {data_.data() + plane_offset(channel), static_cast<std::size_t>(width_) * height_};
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  /// Throws if any sample is non-finite or outside [0,1].
  void validate() const;

  bool operator==(const MultiChannelImage&) const = default;

 private:
  std::size_t plane_offset(int channel) const {
    return static_cast<std::size_t>(channel) * width_ * height_;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Summed-area table of one channel. Entry (x,y) holds the sum over
/// [0,x) x [0,y), so row 0 and column 0 are zero.
class IntegralImage {
 public:
  IntegralImage() = default;

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int x, int y) const { return table_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }

  /// Sum over an already clipped, non-empty rectangle.
  double sum_unchecked(const Rect& r) const {
    return at(r.x1, r.y1) - at(r.x0, r.y1) - at(r.x1, r.y0) + at(r.x0, r.y0);
  }

 private:
  friend IntegralImage build_integral(const MultiChannelImage& image, int channel);

  int width_ = 0;
  int height_ = 0;
  std::vector<double> table_;
};

IntegralImage build_integral(const MultiChannelImage& image, int channel);
std::vector<IntegralImage> build_integrals(const MultiChannelImage& image);

/// Sum of intensities over `rect` after clipping to the image; 0 for empty.
double rect_sum(const IntegralImage& ii, const Rect& rect);

/// Single-channel image from a binary PGM (P5), normalized by maxval.
std::vector<double> read_pgm(const std::filesystem::path& path, int& width, int& height);

/// Writes one channel as P5 with the given maxval (255 or up to 65535),
/// quantizing by rounding value*maxval.
void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, int width,
               int height, int maxval = 255);

/// One PGM per channel, all of the same size.
MultiChannelImage load_image(std::span<const std::filesystem::path> paths);
void save_image(const MultiChannelImage& image, std::span<const std::filesystem::path> paths,
                int maxval = 255);

/// `<frame>_c<channel>.pgm` inside `dir`.
std::filesystem::path channel_path(const std::filesystem::path& dir, const std::string& frame,
                                   int channel);

}  // namespace hmd
