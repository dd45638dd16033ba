#include "hmd/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "hmd/error.hpp"
#include "json.hpp"

namespace hmd {

using nlohmann::json;
using nlohmann::ordered_json;

const GroundTruthFrame& Movie::annotation(int frameIndex) const {
  if (frameIndex < 0 || frameIndex >= static_cast<int>(annotations.size())) {
    throw Error(ErrorCode::OutOfRange,
                "movie " + movieId + " has no frame " + std::to_string(frameIndex));
  }
  return annotations[frameIndex];
}

const Movie& Dataset::movie(const std::string& id) const {
  for (const Movie& m : movies) {
    if (m.movieId == id) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown movie '" + id + "'");
}

std::vector<std::string> Dataset::movie_ids() const {
  std::vector<std::string> ids;
  for (const Movie& m : movies) ids.push_back(m.movieId);
  return ids;
}

Dataset Dataset::subset(const std::vector<std::string>& ids) const {
  Dataset out;
  out.channels = channels;
  for (const std::string& id : ids) out.movies.push_back(movie(id));
  return out;
}

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%03d", index);
  return buf;
}

void validate_events(const Movie& movie) {
  for (const GroundTruthEvent& e : movie.events) {
    if (e.frameT < 0 || e.frameT + 1 >= static_cast<int>(movie.annotations.size())) {
      throw Error(ErrorCode::InvalidArgument, "movie " + movie.movieId + ": event at frame " +
                                                  std::to_string(e.frameT) + " has no next frame");
    }
    const auto mother = find_object(movie.annotations[e.frameT], e.motherObjectId);
    const auto pair = find_object(movie.annotations[e.frameT + 1], e.daughterPairObjectId);
    if (!mother || mother->label != ClassLabel::Mother) {
      throw Error(ErrorCode::InvalidArgument, "movie " + movie.movieId + ": event mother " +
                                                  std::to_string(e.motherObjectId) +
                                                  " missing or not a mother");
    }
    if (!pair || pair->label != ClassLabel::Daughter) {
      throw Error(ErrorCode::InvalidArgument, "movie " + movie.movieId + ": event daughter pair " +
                                                  std::to_string(e.daughterPairObjectId) +
                                                  " missing or not a daughter pair");
    }
  }
}

namespace {

[[noreturn]] void bad_gt(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorCode::CorruptFile, path.string() + ": " + what);
}

}  // namespace

Dataset read_ground_truth(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error(ErrorCode::FileNotFound, "ground truth not found: " + json_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad_gt(json_path, e.what());
  }
  if (!j.contains("formatVersion") || j["formatVersion"] != kGroundTruthFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                json_path.string() + ": unsupported ground-truth formatVersion");
  }
  Dataset ds;
  try {
    ds.channels = j.value("channels", 2);
    for (const json& jm : j.at("movies")) {
      Movie m;
      m.movieId = jm.at("movieId").get<std::string>();
      for (const json& jf : jm.at("frames")) {
        GroundTruthFrame f;
        f.frameIndex = jf.at("frameIndex").get<int>();
        if (f.frameIndex != static_cast<int>(m.annotations.size())) {
          bad_gt(json_path, "frames of movie " + m.movieId + " must be listed in order");
        }
        for (const json& jc : jf.at("contours")) {
          GroundTruthContour c;
          c.objectId = jc.at("objectId").get<int>();
          c.label = parse_class_label(jc.at("class").get<std::string>());
          for (const json& v : jc.at("polygon")) c.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
          f.contours.push_back(std::move(c));
        }
        validate_frame(f);
        m.annotations.push_back(std::move(f));
      }
      for (const json& je : jm.at("events")) {
        GroundTruthEvent e;
        e.movieId = m.movieId;
        e.frameT = je.at("frameT").get<int>();
        e.motherObjectId = je.at("motherObjectId").get<int>();
        e.daughterPairObjectId = je.at("daughterPairObjectId").get<int>();
        m.events.push_back(e);
      }
      validate_events(m);
      ds.movies.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    bad_gt(json_path, e.what());
  }
  return ds;
}

void write_ground_truth(const Dataset& dataset, const std::filesystem::path& json_path) {
  ordered_json j;
  j["formatVersion"] = kGroundTruthFormatVersion;
  j["channels"] = dataset.channels;
  j["movies"] = ordered_json::array();
  for (const Movie& m : dataset.movies) {
    ordered_json jm;
    jm["movieId"] = m.movieId;
    jm["frames"] = ordered_json::array();
    for (const GroundTruthFrame& f : m.annotations) {
      ordered_json jf;
      jf["frameIndex"] = f.frameIndex;
      jf["contours"] = ordered_json::array();
      for (const GroundTruthContour& c : f.contours) {
        ordered_json jc;
        jc["objectId"] = c.objectId;
        jc["class"] = std::string(to_string(c.label));
        ordered_json poly = ordered_json::array();
        for (const Vec2& v : c.polygon) poly.push_back({v.x, v.y});
        jc["polygon"] = std::move(poly);
        jf["contours"].push_back(std::move(jc));
      }
      jm["frames"].push_back(std::move(jf));
    }
    jm["events"] = ordered_json::array();
    for (const GroundTruthEvent& e : m.events) {
      jm["events"].push_back({{"frameT", e.frameT},
                              {"motherObjectId", e.motherObjectId},
                              {"daughterPairObjectId", e.daughterPairObjectId}});
    }
    j["movies"].push_back(std::move(jm));
  }
  std::ofstream out(json_path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + json_path.string());
  out << j.dump(1) << '\n';
}

Dataset load_dataset(const std::filesystem::path& root) {
  Dataset ds = read_ground_truth(root / "groundtruth.json");
  for (Movie& m : ds.movies) {
    for (std::size_t f = 0; f < m.annotations.size(); ++f) {
      std::vector<std::filesystem::path> paths;
      for (int c = 0; c < ds.channels; ++c) {
        paths.push_back(channel_path(root / m.movieId, frame_name(static_cast<int>(f)), c));
      }
      m.frames.push_back(load_image(paths));
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  write_ground_truth(dataset, root / "groundtruth.json");
  for (const Movie& m : dataset.movies) {
    std::filesystem::create_directories(root / m.movieId);
    for (std::size_t f = 0; f < m.frames.size(); ++f) {
      std::vector<std::filesystem::path> paths;
      for (int c = 0; c < m.frames[f].channels(); ++c) {
        paths.push_back(channel_path(root / m.movieId, frame_name(static_cast<int>(f)), c));
      }
      save_image(m.frames[f], paths, 65535);
    }
  }
}

}  // namespace hmd
