// Batch command-line front end: synth, train, detect, train-crf,
// detect-mitosis, eval, pr-plot, ablate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hmd/config.hpp"
#include "hmd/dataset.hpp"
#include "hmd/error.hpp"
#include "hmd/pipeline.hpp"
#include "hmd/synth.hpp"

namespace fs = std::filesystem;
using namespace hmd;

namespace {

constexpr int kSummaryFormatVersion = 1;
constexpr const char* kModelFile = "model.hmdf";
constexpr const char* kWeightsFile = "weights.json";

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string folds;
  std::string out = ".";
  std::string data;
  std::string model;
  std::string weights;
  std::string detections;
  std::string events;
  std::vector<std::string> inputs;
  std::string task = "cells";
};

PipelineConfig load_config(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? parse_config_text("{}") : parse_config(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  if (!o.mode.empty()) cfg.mode = parse_forest_mode(o.mode);
  if (!o.folds.empty()) {
    if (o.folds == "loo") {
      cfg.folds = 0;
    } else {
      try {
        cfg.folds = std::stoi(o.folds);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "--folds expects a number or 'loo'");
      }
      if (cfg.folds < 2) throw Error(ErrorCode::InvalidArgument, "--folds needs at least 2 folds");
    }
  }
  return cfg;
}

fs::path out_dir(const Options& o) {
  fs::create_directories(o.out);
  return o.out;
}

const std::string& required(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::InvalidArgument, std::string("missing required ") + flag);
  return value;
}

void log(const std::string& msg) { std::cerr << "[hmd] " << msg << '\n'; }

nlohmann::ordered_json cv_json(const std::vector<double>& folds, double mean) {
  nlohmann::ordered_json j;
  j["folds"] = folds;
  j["meanAuc"] = mean;
  return j;
}

std::vector<double> fold_aucs(const CrossValidationResult& cv) {
  std::vector<double> out;
  for (const FoldOutcome& f : cv.folds) out.push_back(f.auc);
  return out;
}

void write_json(const nlohmann::ordered_json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_fold_curves(const CrossValidationResult& cv, const fs::path& dir, const std::string& stem) {
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    write_pr_csv(cv.folds[f].curve, dir / (stem + "_fold" + std::to_string(f) + ".csv"));
  }
}

int cmd_synth(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = generate_dataset(cfg.synth, cfg.movieCount);
  save_dataset(ds, out_dir(o));
  log("wrote " + std::to_string(ds.movies.size()) + " movies to " + o.out);
  return 0;
}

int cmd_train(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = load_dataset(required(o.data, "--data"));
  const HoughForestModel model = train_model(ds, cfg);
  const fs::path path = out_dir(o) / kModelFile;
  save_model(model, path);
  log("model (" + std::string(to_string(cfg.mode)) + ") written to " + path.string());
  return 0;
}

int cmd_detect(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = load_dataset(required(o.data, "--data"));
  const HoughForestModel model = load_model(required(o.model, "--model"));
  const fs::path path = out_dir(o) / "detections.csv";
  write_detections_csv(detect_cells(model, ds, cfg), path);
  log("detections written to " + path.string());
  return 0;
}

int cmd_train_crf(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = load_dataset(required(o.data, "--data"));
  const HoughForestModel model = load_model(required(o.model, "--model"));
  const CrfWeights w = train_crf(compute_maps(model, ds, cfg.voting), ds, cfg);
  const fs::path path = out_dir(o) / kWeightsFile;
  save_weights(w, path);
  log("CRF weights written to " + path.string());
  return 0;
}

int cmd_detect_mitosis(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = load_dataset(required(o.data, "--data"));
  const HoughForestModel model = load_model(required(o.model, "--model"));
  const CrfWeights w = load_weights(required(o.weights, "--weights"));
  std::vector<ScoredEvent> events = detect_events(compute_maps(model, ds, cfg.voting), w, cfg.mitosis);
  std::stable_sort(events.begin(), events.end(),
                   [](const ScoredEvent& a, const ScoredEvent& b) { return a.score > b.score; });
  const fs::path path = out_dir(o) / "events.csv";
  write_events_csv(events, path);
  log(std::to_string(events.size()) + " events written to " + path.string());
  return 0;
}

int cmd_eval(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = load_dataset(required(o.data, "--data"));
  const fs::path dir = out_dir(o);
  nlohmann::ordered_json summary;
  summary["formatVersion"] = kSummaryFormatVersion;
  summary["task"] = o.task;

  if (o.task == "cells") {
    summary["mode"] = std::string(to_string(cfg.mode));
    if (!o.detections.empty()) {
      const auto dets = read_detections_csv(o.detections);
      const CurveResult m = evaluate_cells(dets, ds, ClassLabel::Mother, cfg.regionRule);
      const CurveResult d = evaluate_cells(dets, ds, ClassLabel::Daughter, cfg.regionRule);
      write_pr_csv(m.curve, dir / "pr_mother.csv");
      write_pr_csv(d.curve, dir / "pr_daughter.csv");
      summary["mother"] = cv_json({m.auc}, m.auc);
      summary["daughter"] = cv_json({d.auc}, d.auc);
    } else {
      const CellCrossValidation cv = cross_validate_cells(ds, cfg);
      write_fold_curves(cv.mother, dir, "pr_mother");
      write_fold_curves(cv.daughter, dir, "pr_daughter");
      summary["mother"] = cv_json(fold_aucs(cv.mother), cv.mother.meanAuc);
      summary["daughter"] = cv_json(fold_aucs(cv.daughter), cv.daughter.meanAuc);
    }
  } else if (o.task == "mitosis") {
    if (!o.events.empty()) {
      const CurveResult r = evaluate_events(read_events_csv(o.events), ds, cfg.regionRule);
      write_pr_csv(r.curve, dir / "pr_mitosis.csv");
      summary["mitosis"] = cv_json({r.auc}, r.auc);
    } else {
      const CrossValidationResult cv = cross_validate_mitosis(ds, cfg);
      write_fold_curves(cv, dir, "pr_mitosis");
      summary["mitosis"] = cv_json(fold_aucs(cv), cv.meanAuc);
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "--task must be 'cells' or 'mitosis'");
  }
  write_json(summary, dir / "auc.json");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_pr_plot(const Options& o) {
  if (o.inputs.empty()) throw Error(ErrorCode::InvalidArgument, "missing required --in");
  std::vector<std::pair<std::string, std::vector<PrPoint>>> curves;
  for (const std::string& in : o.inputs) curves.emplace_back(fs::path(in).stem().string(), read_pr_csv(in));
  const fs::path path = out_dir(o) / "pr.svg";
  write_pr_svg(curves, path);
  log("plot written to " + path.string());
  return 0;
}

int cmd_ablate(const Options& o) {
  const PipelineConfig cfg = load_config(o);
  const Dataset ds = load_dataset(required(o.data, "--data"));
  const std::vector<AblationSummary> rows = cross_validate_ablation(ds, cfg);
  const fs::path path = out_dir(o) / "ablation.csv";
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "# hmd ablation v" << kCsvFormatVersion << "\nmodel,auc\n" << std::setprecision(17);
  std::printf("%-20s %s\n", "model", "mean AUC");
  for (const AblationSummary& r : rows) {
    out << r.name << ',' << r.meanAuc << '\n';
    std::printf("%-20s %.4f\n", r.name.c_str(), r.meanAuc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mitosis detection: Hough forest cell detection and CRF event association"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Base seed; overrides the config");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto with_data = [&](CLI::App* sub) { sub->add_option("--data", o.data, "Dataset directory"); };
  auto with_model = [&](CLI::App* sub) { sub->add_option("--model", o.model, "Forest model file"); };
  auto with_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "Forest variant")->check(CLI::IsMember({"hf", "cf-hv", "cf"}));
  };
  auto with_folds = [&](CLI::App* sub) {
    sub->add_option("--folds", o.folds, "Cross-validation folds, or 'loo'");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  common(synth);
  auto* train = app.add_subcommand("train", "Train a forest");
  common(train), with_data(train), with_mode(train);
  auto* detect = app.add_subcommand("detect", "Detect mother cells and daughter pairs");
  common(detect), with_data(detect), with_model(detect);
  auto* train_crf = app.add_subcommand("train-crf", "Learn CRF weights");
  common(train_crf), with_data(train_crf), with_model(train_crf);
  auto* detect_mitosis = app.add_subcommand("detect-mitosis", "Detect ranked mitosis events");
  common(detect_mitosis), with_data(detect_mitosis), with_model(detect_mitosis);
  detect_mitosis->add_option("--weights", o.weights, "CRF weights file");
  auto* eval = app.add_subcommand("eval", "PR curves and AUC, from a file or by cross-validation");
  common(eval), with_data(eval), with_mode(eval), with_folds(eval);
  eval->add_option("--task", o.task, "cells or mitosis")->check(CLI::IsMember({"cells", "mitosis"}));
  eval->add_option("--detections", o.detections, "Detection CSV to score instead of training");
  eval->add_option("--events", o.events, "Event CSV to score instead of training");
  auto* pr_plot = app.add_subcommand("pr-plot", "Render PR CSV files as SVG");
  pr_plot->add_option("--in", o.inputs, "PR CSV file(s)")->required();
  pr_plot->add_option("--out", o.out, "Output directory");
  auto* ablate = app.add_subcommand("ablate", "Full vs reduced CRF models");
  common(ablate), with_data(ablate), with_mode(ablate), with_folds(ablate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(o);
    if (*train) return cmd_train(o);
    if (*detect) return cmd_detect(o);
    if (*train_crf) return cmd_train_crf(o);
    if (*detect_mitosis) return cmd_detect_mitosis(o);
    if (*eval) return cmd_eval(o);
    if (*pr_plot) return cmd_pr_plot(o);
    if (*ablate) return cmd_ablate(o);
  } catch (const Error& e) {
    std::cerr << "hmd: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hmd: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
