#include "hmd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hmd/error.hpp"

namespace hmd {

MultiChannelImage::MultiChannelImage(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || channels < 1) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions and channel count must be >= 1");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

void MultiChannelImage::validate() const {
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::OutOfRange, "image intensity outside [0,1]");
    }
  }
}

IntegralImage build_integral(const MultiChannelImage& image, int channel) {
  if (channel < 0 || channel >= image.channels()) {
    throw Error(ErrorCode::OutOfRange, "channel index " + std::to_string(channel) +
                                           " out of range for " +
                                           std::to_string(image.channels()) + " channels");
  }
  IntegralImage ii;
  ii.width_ = image.width();
  ii.height_ = image.height();
  const std::size_t stride = static_cast<std::size_t>(ii.width_) + 1;
  ii.table_.assign(stride * (ii.height_ + 1), 0.0);
  for (int y = 0; y < ii.height_; ++y) {
    double row = 0.0;
    for (int x = 0; x < ii.width_; ++x) {
      row += image.at(channel, x, y);
      ii.table_[(y + 1) * stride + x + 1] = ii.table_[y * stride + x + 1] + row;
    }
  }
  return ii;
}

std::vector<IntegralImage> build_integrals(const MultiChannelImage& image) {
  std::vector<IntegralImage> out;
  out.reserve(image.channels());
  for (int c = 0; c < image.channels(); ++c) out.push_back(build_integral(image, c));
  return out;
}

double rect_sum(const IntegralImage& ii, const Rect& rect) {
  const Rect r = rect.clipped(ii.width(), ii.height());
  if (r.empty()) return 0.0;
  return ii.sum_unchecked(r);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_positive(const std::string& tok, const std::filesystem::path& path, const char* what) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); }) ||
      tok.size() > 9) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": bad " + what + " '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

std::vector<double> read_pgm(const std::filesystem::path& path, int& width, int& height) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  if (next_token(in) != "P5") {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": not a binary PGM (P5)");
  }
  width = parse_positive(next_token(in), path, "width");
  height = parse_positive(next_token(in), path, "height");
  const int maxval = parse_positive(next_token(in), path, "maxval");
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": zero dimension");
  }
  if (maxval == 0) throw Error(ErrorCode::MalformedHeader, path.string() + ": maxval of 0");
  if (maxval > 65535) throw Error(ErrorCode::MalformedHeader, path.string() + ": maxval > 65535");

  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": truncated pixel data");
  }

  std::vector<double> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned v = bytes_per == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    if (v > static_cast<unsigned>(maxval)) {
      throw Error(ErrorCode::MalformedHeader, path.string() + ": sample exceeds maxval");
    }
    pixels[i] = static_cast<double>(v) / maxval;
  }
  return pixels;
}

void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, int width,
               int height, int maxval) {
  if (maxval < 1 || maxval > 65535) {
    throw Error(ErrorCode::InvalidArgument, "maxval must be in [1,65535]");
  }
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::DimensionMismatch, "pixel count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(pixels.size() * (maxval > 255 ? 2 : 1));
  for (double p : pixels) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(p, 0.0, 1.0) * maxval));
    if (maxval > 255) raw.push_back(static_cast<unsigned char>(v >> 8));
    raw.push_back(static_cast<unsigned char>(v & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

MultiChannelImage load_image(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw Error(ErrorCode::InvalidArgument, "no channel files given");
  std::vector<std::vector<double>> planes;
  int width = 0, height = 0;
  for (std::size_t c = 0; c < paths.size(); ++c) {
    int w, h;
    planes.push_back(read_pgm(paths[c], w, h));
    if (c == 0) {
      width = w;
      height = h;
    } else if (w != width || h != height) {
      throw Error(ErrorCode::DimensionMismatch,
                  "channel " + std::to_string(c) + " is " + std::to_string(w) + "x" +
                      std::to_string(h) + ", expected " + std::to_string(width) + "x" +
                      std::to_string(height));
    }
  }
  MultiChannelImage image(width, height, static_cast<int>(paths.size()));
  for (std::size_t c = 0; c < planes.size(); ++c) {
    std::copy(planes[c].begin(), planes[c].end(), image.plane(static_cast<int>(c)).begin());
  }
  return image;
}

void save_image(const MultiChannelImage& image, std::span<const std::filesystem::path> paths,
                int maxval) {
  if (paths.size() != static_cast<std::size_t>(image.channels())) {
    throw Error(ErrorCode::InvalidArgument, "one path per channel required");
  }
  for (int c = 0; c < image.channels(); ++c) {
    write_pgm(paths[c], image.plane(c), image.width(), image.height(), maxval);
  }
}

std::filesystem::path channel_path(const std::filesystem::path& dir, const std::string& frame,
                                   int channel) {
  return dir / (frame + "_c" + std::to_string(channel) + ".pgm");
}

}  // namespace hmd
