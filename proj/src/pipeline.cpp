#include "hmd/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hmd/error.hpp"
#include "hmd/parallel.hpp"
#include "hmd/sampling.hpp"

namespace hmd {

HoughForestModel train_model(const Dataset& train, const PipelineConfig& cfg) {
  const TrainingSet set = build_training_set(train, cfg.sampling);
  ForestParams params = cfg.forest;
  params.apply_mode(cfg.mode);
  return train_forest(set, params);
}

namespace {

struct FrameRef {
  const Movie* movie;
  int frame;
};

std::vector<FrameRef> all_frames(const Dataset& dataset) {
  std::vector<FrameRef> refs;
  for (const Movie& m : dataset.movies) {
    for (int f = 0; f < static_cast<int>(m.frames.size()); ++f) refs.push_back({&m, f});
  }
  return refs;
}

Point clamp_to(Vec2 p, int width, int height) {
  return {std::clamp(static_cast<int>(std::lround(p.x)), 0, width - 1),
          std::clamp(static_cast<int>(std::lround(p.y)), 0, height - 1)};
}

}  // namespace

MapSet compute_maps(const HoughForestModel& model, const Dataset& dataset,
                    const VotingParams& voting) {
  const std::vector<FrameRef> refs = all_frames(dataset);
  std::vector<FrameMaps> flat(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    const HoughMaps raw = cast_votes(model, refs[i].movie->frames[refs[i].frame]);
    flat[i].mother = smooth(raw[vote_slot(ClassLabel::Mother)], voting.smoothingSigma);
    flat[i].daughter = smooth(raw[vote_slot(ClassLabel::Daughter)], voting.smoothingSigma);
  });
  MapSet maps;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    maps[refs[i].movie->movieId].push_back(std::move(flat[i]));
  }
  return maps;
}

std::vector<FrameDetections> detect_cells(const MapSet& maps, const VotingParams& voting) {
  std::vector<FrameDetections> out;
  for (const auto& [movie_id, frames] : maps) {
    for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
      FrameDetections d{movie_id, f, {}, {}};
      d.mothers = nms(frames[f].mother, voting.nmsRadius, voting.detectionThreshold);
      d.daughters = nms(frames[f].daughter, voting.nmsRadius, voting.detectionThreshold);
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<FrameDetections> detect_cells(const HoughForestModel& model, const Dataset& dataset,
                                          const PipelineConfig& cfg) {
  if (model.params.storeVotes) return detect_cells(compute_maps(model, dataset, cfg.voting), cfg.voting);

  const std::vector<FrameRef> refs = all_frames(dataset);
  std::vector<FrameDetections> out(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    const MultiChannelImage& image = refs[i].movie->frames[refs[i].frame];
    const std::vector<IntegralImage> integrals = build_integrals(image);
    const auto posteriors = posterior_maps(model, integrals);
    out[i].movieId = refs[i].movie->movieId;
    out[i].frameIndex = refs[i].frame;
    out[i].mothers =
        component_detections(posteriors, image.width(), image.height(), ClassLabel::Mother);
    out[i].daughters =
        component_detections(posteriors, image.width(), image.height(), ClassLabel::Daughter);
  });
  return out;
}

CurveResult evaluate_cells(const std::vector<FrameDetections>& detections, const Dataset& dataset,
                           ClassLabel label, RegionRule rule) {
  std::map<std::pair<std::string, int>, const FrameDetections*> index;
  for (const FrameDetections& d : detections) index[{d.movieId, d.frameIndex}] = &d;

  std::vector<double> scores;
  std::vector<bool> hits;
  int gt_count = 0;
  for (const Movie& movie : dataset.movies) {
    for (const GroundTruthFrame& gt : movie.annotations) {
      gt_count += static_cast<int>(objects_of(gt, label).size());
      const auto it = index.find({movie.movieId, gt.frameIndex});
      if (it == index.end()) continue;
      const auto& dets = label == ClassLabel::Mother ? it->second->mothers : it->second->daughters;
      const MatchResult r = match_detections(dets, gt, label, rule);
      for (const Assignment& a : r.assignments) {
        scores.push_back(dets[a.item].score);
        hits.push_back(a.truePositive);
      }
    }
  }
  CurveResult result;
  result.curve = pr_curve_ranked(scores, hits, gt_count);
  result.auc = auc(result.curve);
  return result;
}

std::vector<double> event_distances(const Dataset& dataset) {
  std::vector<double> out;
  for (const Movie& movie : dataset.movies) {
    for (const GroundTruthEvent& e : movie.events) {
      const auto m = find_object(movie.annotation(e.frameT), e.motherObjectId);
      const auto d = find_object(movie.annotation(e.frameT + 1), e.daughterPairObjectId);
      if (!m || !d) throw Error(ErrorCode::InvalidArgument, "event links a missing object");
      out.push_back((m->center - d->center).norm());
    }
  }
  return out;
}

std::vector<LabeledTriple> crf_training_triples(const MapSet& maps, const Dataset& dataset,
                                                const DistanceStats& stats,
                                                const PipelineConfig& cfg) {
  std::vector<LabeledTriple> triples;
  for (const Movie& movie : dataset.movies) {
    const auto it = maps.find(movie.movieId);
    if (it == maps.end()) throw Error(ErrorCode::InvalidArgument, "no maps for " + movie.movieId);
    const std::vector<FrameMaps>& frames = it->second;

    for (int t = 0; t + 1 < static_cast<int>(frames.size()); ++t) {
      const HoughMap& hm = frames[t].mother;
      const HoughMap& hd = frames[t + 1].daughter;
      const std::vector<MitosisCandidate> candidates = gated_candidates(hm, hd, stats, cfg.mitosis);

      std::vector<std::pair<GroundTruthObject, GroundTruthObject>> events;
      for (const GroundTruthEvent& e : movie.events) {
        if (e.frameT != t) continue;
        auto m = find_object(movie.annotation(t), e.motherObjectId);
        auto d = find_object(movie.annotation(t + 1), e.daughterPairObjectId);
        if (!m || !d) throw Error(ErrorCode::InvalidArgument, "event links a missing object");
        events.emplace_back(std::move(*m), std::move(*d));
      }

      for (const auto& [mother, pair] : events) {
        const Point mp = clamp_to(mother.center, hm.width, hm.height);
        const Point dp = clamp_to(pair.center, hd.width, hd.height);
        triples.push_back(
            {{hm.at(mp.x, mp.y), hd.at(dp.x, dp.y), distance_prob(mother.center, pair.center, stats)}, 1});
      }

      std::vector<MitosisCandidate> negatives;
      for (const MitosisCandidate& c : candidates) {
        const Vec2 mp{double(c.mother.position.x), double(c.mother.position.y)};
        const Vec2 dp{double(c.daughterPair.position.x), double(c.daughterPair.position.y)};
        const bool hits_event = std::any_of(events.begin(), events.end(), [&](const auto& e) {
          return e.first.contains(mp, cfg.regionRule) && e.second.contains(dp, cfg.regionRule);
        });
        if (!hits_event) negatives.push_back(c);
      }

      auto unit = [](const MitosisCandidate& c) {
        return c.features.h_m + c.features.h_d + c.features.p_dist;
      };
      std::stable_sort(negatives.begin(), negatives.end(),
                       [&](const auto& a, const auto& b) { return unit(a) > unit(b); });
      const std::size_t keep =
          std::min(negatives.size(), static_cast<std::size_t>(cfg.negativesPerPair));
      for (std::size_t k = 0; k < keep; ++k) triples.push_back({negatives[k].features, 0});
    }
  }
  return triples;
}

namespace {

CrfWeights fit_masked(const std::vector<LabeledTriple>& triples, const DistanceStats& stats,
                      const PipelineConfig& cfg, FeatureMask mask) {
  LogisticParams lp = cfg.logistic;
  lp.mask = mask;
  CrfWeights w = fit_weights(triples, lp);
  w.stats = stats;
  return w;
}

}  // namespace

CrfWeights train_crf(const MapSet& maps, const Dataset& dataset, const PipelineConfig& cfg,
                     FeatureMask mask) {
  const DistanceStats stats = fit_distance_stats(event_distances(dataset));
  return fit_masked(crf_training_triples(maps, dataset, stats, cfg), stats, cfg, mask);
}

std::vector<ScoredEvent> detect_events(const MapSet& maps, const CrfWeights& weights,
                                       const MitosisParams& params) {
  std::vector<ScoredEvent> out;
  for (const auto& [movie_id, frames] : maps) {
    for (int t = 0; t + 1 < static_cast<int>(frames.size()); ++t) {
      for (const MitosisCandidate& c :
           detect_mitosis(frames[t].mother, frames[t + 1].daughter, weights, params)) {
        out.push_back({movie_id, t, c.mother.position, c.daughterPair.position, c.score});
      }
    }
  }
  return out;
}

CurveResult evaluate_events(const std::vector<ScoredEvent>& events, const Dataset& dataset,
                            RegionRule rule) {
  std::vector<GroundTruthEvent> gt;
  for (const Movie& m : dataset.movies) {
    for (GroundTruthEvent e : m.events) {
      e.movieId = m.movieId;
      gt.push_back(e);
    }
  }
  const FrameLookup lookup = [&](const std::string& id, int frame) -> const GroundTruthFrame& {
    return dataset.movie(id).annotation(frame);
  };
  const MatchResult r = match_mitosis(events, gt, lookup, rule);
  std::vector<double> scores;
  std::vector<bool> hits;
  for (const Assignment& a : r.assignments) {
    scores.push_back(events[a.item].score);
    hits.push_back(a.truePositive);
  }
  CurveResult result;
  result.curve = pr_curve_ranked(scores, hits, static_cast<int>(gt.size()));
  result.auc = auc(result.curve);
  return result;
}

std::vector<AblationRow> run_ablation(const MapSet& train_maps, const Dataset& train,
                                      const MapSet& test_maps, const Dataset& test,
                                      const PipelineConfig& cfg) {
  const DistanceStats stats = fit_distance_stats(event_distances(train));
  const std::vector<LabeledTriple> triples = crf_training_triples(train_maps, train, stats, cfg);
  std::vector<AblationRow> rows = {
      {"full", {true, true, true}, {}},
      {"mother+daughter", {true, true, false}, {}},
      {"daughter+distance", {false, true, true}, {}},
      {"mother+distance", {true, false, true}, {}},
  };
  for (AblationRow& row : rows) {
    const CrfWeights w = fit_masked(triples, stats, cfg, row.mask);
    row.result = evaluate_events(detect_events(test_maps, w, cfg.mitosis), test, cfg.regionRule);
  }
  return rows;
}

namespace {

std::uint64_t fold_seed(const PipelineConfig& cfg) { return derive_seed(cfg.seed, 4); }

FoldOutcome outcome(const CurveResult& r) { return {r.auc, r.curve}; }

void require_votes(const PipelineConfig& cfg) {
  if (cfg.mode == ForestMode::Classification) {
    throw Error(ErrorCode::InvalidArgument, "mitosis detection needs a forest that stores votes");
  }
}

}  // namespace

CellCrossValidation cross_validate_cells(const Dataset& dataset, const PipelineConfig& cfg) {
  std::vector<FoldOutcome> daughter_folds;
  CellCrossValidation cv;
  cv.mother = cross_validate(
      dataset.movie_ids(), cfg.folds, fold_seed(cfg),
      [&](const std::vector<std::string>& train, const std::vector<std::string>& test) {
        const Dataset test_set = dataset.subset(test);
        const HoughForestModel model = train_model(dataset.subset(train), cfg);
        const auto dets = detect_cells(model, test_set, cfg);
        daughter_folds.push_back(
            outcome(evaluate_cells(dets, test_set, ClassLabel::Daughter, cfg.regionRule)));
        return outcome(evaluate_cells(dets, test_set, ClassLabel::Mother, cfg.regionRule));
      });
  cv.daughter.testMovies = cv.mother.testMovies;
  cv.daughter.folds = std::move(daughter_folds);
  double sum = 0.0;
  for (const FoldOutcome& f : cv.daughter.folds) sum += f.auc;
  cv.daughter.meanAuc = sum / static_cast<double>(cv.daughter.folds.size());
  return cv;
}

CrossValidationResult cross_validate_mitosis(const Dataset& dataset, const PipelineConfig& cfg) {
  require_votes(cfg);
  return cross_validate(
      dataset.movie_ids(), cfg.folds, fold_seed(cfg),
      [&](const std::vector<std::string>& train, const std::vector<std::string>& test) {
        const Dataset train_set = dataset.subset(train);
        const Dataset test_set = dataset.subset(test);
        const HoughForestModel model = train_model(train_set, cfg);
        const CrfWeights w = train_crf(compute_maps(model, train_set, cfg.voting), train_set, cfg);
        const auto events = detect_events(compute_maps(model, test_set, cfg.voting), w, cfg.mitosis);
        return outcome(evaluate_events(events, test_set, cfg.regionRule));
      });
}

std::vector<AblationSummary> cross_validate_ablation(const Dataset& dataset,
                                                     const PipelineConfig& cfg) {
  require_votes(cfg);
  std::vector<AblationSummary> summary;
  cross_validate(
      dataset.movie_ids(), cfg.folds, fold_seed(cfg),
      [&](const std::vector<std::string>& train, const std::vector<std::string>& test) {
        const Dataset train_set = dataset.subset(train);
        const Dataset test_set = dataset.subset(test);
        const HoughForestModel model = train_model(train_set, cfg);
        const auto rows = run_ablation(compute_maps(model, train_set, cfg.voting), train_set,
                                       compute_maps(model, test_set, cfg.voting), test_set, cfg);
        if (summary.empty()) {
          for (const AblationRow& r : rows) summary.push_back({r.name, {}, 0.0});
        }
        for (std::size_t i = 0; i < rows.size(); ++i) summary[i].foldAuc.push_back(rows[i].result.auc);
        return outcome(rows.front().result);
      });
  for (AblationSummary& s : summary) {
    double sum = 0.0;
    for (double a : s.foldAuc) sum += a;
    s.meanAuc = sum / static_cast<double>(s.foldAuc.size());
  }
  return summary;
}

// ---- CSV ----

namespace {

std::string frame_key(const std::string& movie, int frame) {
  return movie + "/" + std::to_string(frame);
}

std::pair<std::string, int> split_frame_key(const std::string& key) {
  const auto slash = key.rfind('/');
  if (slash == std::string::npos) throw Error(ErrorCode::CorruptFile, "bad frame key: " + key);
  int frame = 0;
  const char* first = key.data() + slash + 1;
  const char* last = key.data() + key.size();
  const auto [ptr, ec] = std::from_chars(first, last, frame);
  if (ec != std::errc{} || ptr != last) throw Error(ErrorCode::CorruptFile, "bad frame key: " + key);
  return {key.substr(0, slash), frame};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  return cells;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::CorruptFile, "bad number: " + s);
  }
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::CorruptFile, "bad integer: " + s);
  }
  return v;
}

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ofstream open_csv(const std::filesystem::path& path, const char* kind, const char* header) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "# hmd " << kind << " v" << kCsvFormatVersion << '\n' << header << '\n';
  return out;
}

/// Data rows after checking the version line and column header.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const char* kind,
                                               const char* header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
  std::string line;
  const std::string version = std::string("# hmd ") + kind + " v";
  if (!std::getline(in, line) || line.rfind(version, 0) != 0) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": missing format header");
  }
  if (line != version + std::to_string(kCsvFormatVersion)) {
    throw Error(ErrorCode::VersionMismatch, path.string() + ": unsupported format version");
  }
  if (!std::getline(in, line) || line != header) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": unexpected column header");
  }
  const std::size_t columns = split(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != columns) {
      throw Error(ErrorCode::CorruptFile, path.string() + ": wrong column count: " + line);
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

constexpr const char* kDetectionHeader = "frame,class,x,y,score";
constexpr const char* kEventHeader = "frameT,motherX,motherY,daughterX,daughterY,score";
constexpr const char* kPrHeader = "threshold,recall,precision";

}  // namespace

void write_detections_csv(const std::vector<FrameDetections>& detections,
                          const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, "detections", kDetectionHeader);
  for (const FrameDetections& fd : detections) {
    for (const auto* list : {&fd.mothers, &fd.daughters}) {
      for (const Detection& d : *list) {
        out << frame_key(fd.movieId, fd.frameIndex) << ',' << to_string(d.label) << ','
            << d.position.x << ',' << d.position.y << ',' << num(d.score) << '\n';
      }
    }
  }
}

std::vector<FrameDetections> read_detections_csv(const std::filesystem::path& path) {
  std::vector<FrameDetections> out;
  std::map<std::pair<std::string, int>, std::size_t> slot;
  for (const auto& row : read_csv(path, "detections", kDetectionHeader)) {
    const auto key = split_frame_key(row[0]);
    Detection d;
    d.label = parse_class_label(row[1]);
    d.position = {to_int(row[2]), to_int(row[3])};
    d.score = to_double(row[4]);
    auto [it, fresh] = slot.try_emplace(key, out.size());
    if (fresh) out.push_back({key.first, key.second, {}, {}});
    FrameDetections& fd = out[it->second];
    if (d.label == ClassLabel::Mother) {
      fd.mothers.push_back(d);
    } else if (d.label == ClassLabel::Daughter) {
      fd.daughters.push_back(d);
    } else {
      throw Error(ErrorCode::CorruptFile, "detection of class " + row[1]);
    }
  }
  return out;
}

void write_events_csv(const std::vector<ScoredEvent>& events, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, "events", kEventHeader);
  for (const ScoredEvent& e : events) {
    out << frame_key(e.movieId, e.frameT) << ',' << e.mother.x << ',' << e.mother.y << ','
        << e.daughterPair.x << ',' << e.daughterPair.y << ',' << num(e.score) << '\n';
  }
}

std::vector<ScoredEvent> read_events_csv(const std::filesystem::path& path) {
  std::vector<ScoredEvent> out;
  for (const auto& row : read_csv(path, "events", kEventHeader)) {
    const auto [movie, frame] = split_frame_key(row[0]);
    out.push_back({movie, frame, {to_int(row[1]), to_int(row[2])},
                   {to_int(row[3]), to_int(row[4])}, to_double(row[5])});
  }
  return out;
}

void write_pr_csv(const std::vector<PrPoint>& curve, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, "pr", kPrHeader);
  for (const PrPoint& p : curve) {
    out << num(p.threshold) << ',' << num(p.recall) << ',' << num(p.precision) << '\n';
  }
}

std::vector<PrPoint> read_pr_csv(const std::filesystem::path& path) {
  std::vector<PrPoint> out;
  for (const auto& row : read_csv(path, "pr", kPrHeader)) {
    out.push_back({to_double(row[0]), to_double(row[1]), to_double(row[2])});
  }
  return out;
}

void write_pr_svg(const std::vector<std::pair<std::string, std::vector<PrPoint>>>& curves,
                  const std::filesystem::path& path) {
  constexpr double kW = 480, kH = 360, kLeft = 50, kRight = 20, kTop = 20, kBottom = 45;
  constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  auto sx = [&](double r) { return kLeft + r * (kW - kLeft - kRight); };
  auto sy = [&](double p) { return kH - kBottom - p * (kH - kTop - kBottom); };

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    out << "<line x1=\"" << sx(v) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(v) << "\" y2=\""
        << sy(1) << "\" stroke=\"#ddd\"/>\n";
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(v) << "\" x2=\"" << sx(1) << "\" y2=\""
        << sy(v) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << sx(v) << "\" y=\"" << sy(0) + 14 << "\" text-anchor=\"middle\">" << v
        << "</text>\n";
    out << "<text x=\"" << sx(0) - 6 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">" << v
        << "</text>\n";
  }
  out << "<text x=\"" << sx(0.5) << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">recall</text>\n";
  out << "<text x=\"14\" y=\"" << sy(0.5) << "\" transform=\"rotate(-90 14 " << sy(0.5)
      << ")\" text-anchor=\"middle\">precision</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const PrPoint& p : curves[i].second) out << sx(p.recall) << ',' << sy(p.precision) << ' ';
    out << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(i) + 6;
    out << "<line x1=\"" << kW - 150 << "\" y1=\"" << ly << "\" x2=\"" << kW - 130 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kW - 125 << "\" y=\"" << ly + 4 << "\">" << curves[i].first
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace hmd
