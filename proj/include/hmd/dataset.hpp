#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hmd/ground_truth.hpp"
#include "hmd/image.hpp"

namespace hmd {

struct Movie {
  std::string movieId;
  std::vector<MultiChannelImage> frames;
  std::vector<GroundTruthFrame> annotations;  ///< one per frame, same order
  std::vector<GroundTruthEvent> events;

  const GroundTruthFrame& annotation(int frameIndex) const;
};

struct Dataset {
  int channels = 2;
  std::vector<Movie> movies;

  const Movie& movie(const std::string& id) const;
  std::vector<std::string> movie_ids() const;
  /// Movies whose id is listed, in the order given.
  Dataset subset(const std::vector<std::string>& ids) const;
};

inline constexpr int kGroundTruthFormatVersion = 1;

/// `t<index>` zero-padded to three digits.
std::string frame_name(int index);

/// Ground-truth JSON (formatVersion, channels, movies[] with frames[] of
/// contours and events[]); checks polygons and event links.
Dataset read_ground_truth(const std::filesystem::path& json_path);
void write_ground_truth(const Dataset& dataset, const std::filesystem::path& json_path);

/// Layout: <root>/groundtruth.json and <root>/<movieId>/<frame>_c<channel>.pgm.
Dataset load_dataset(const std::filesystem::path& root);
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

/// Throws unless every event links a mother in frame t to a daughter pair in t+1.
void validate_events(const Movie& movie);

}  // namespace hmd
