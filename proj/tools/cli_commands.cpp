// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli_commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_io.hpp"
#include "sideaware/evaluation.hpp"
#include "sideaware/teacher.hpp"
#include "sideaware/training.hpp"

namespace sideaware::cli {

namespace {

using nlohmann::json;

// rng stream tags for scene splits
enum GenStream : uint64_t { kGenLabeled = 101, kGenUnlabeled = 102, kGenEval = 103, kGenDetections = 104 };

std::filesystem::path report_path(const RunConfig& config, const char* name) {
  return std::filesystem::path(config.paths.report_dir) / name;
}

std::vector<SceneSample> load_scenes_checked(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("scene file does not exist: " + path);
  }
  return read_scenes_file(path);
}

std::vector<SceneGroundTruth> to_ground_truth(const std::vector<SceneSample>& scenes) {
  std::vector<SceneGroundTruth> gts;
  gts.reserve(scenes.size());
  for (const SceneSample& s : scenes) gts.push_back({s.scene_id, s.ground_truth});
  return gts;
}

std::string ap_column_name(double threshold) {
  // 0.25 -> "map25", 0.5 -> "map50"
  std::ostringstream name;
  name << "map" << static_cast<int>(std::lround(threshold * 100));
  return name.str();
}

void write_ssl_report(std::ostream& out, const SslResult& result, const RunConfig& config) {
  out << "iteration,supervised_loss,unsupervised_loss,pseudo_labels,mean_quality,"
         "weighted_side_error,unweighted_side_error";
  for (double t : config.eval_iou_thresholds) out << ',' << ap_column_name(t);
  out << '\n';
  for (const SslCheckpointRow& row : result.rows) {
    out << row.iteration << ',' << format_double(row.supervised_loss) << ','
        << format_double(row.unsupervised_loss) << ',' << row.pseudo_label_count << ','
        << format_double(row.mean_pseudo_quality) << ',' << format_double(row.weighted_side_error)
        << ',' << format_double(row.unweighted_side_error);
    for (size_t t = 0; t < config.eval_iou_thresholds.size(); ++t) {
      out << ',' << (t < row.mean_ap.size() ? format_double(row.mean_ap[t]) : "nan");
    }
    out << '\n';
  }
}

}  // namespace

void cmd_gen(const RunConfig& config, const GenOptions& options, std::ostream& log) {
  validate(config.scene);
  Rng root(config.seed);

  const int labeled_count =
      static_cast<int>(std::llround(config.labeled_ratio * config.scene_count));

  std::vector<SceneSample> labeled, unlabeled, eval_scenes;
  for (int i = 0; i < config.scene_count; ++i) {
    const bool is_labeled = i < labeled_count;
    Rng rng = root.fork(is_labeled ? kGenLabeled : kGenUnlabeled, static_cast<uint64_t>(i));
    SceneSample scene = generate_scene(config.scene, i, is_labeled, rng);
    (is_labeled ? labeled : unlabeled).push_back(std::move(scene));
  }
  if (labeled_count >= config.scene_count) {
    // fully-labeled mode: the unlabeled split is a copy of the labeled data
    for (const SceneSample& scene : labeled) {
      SceneSample copy = scene;
      copy.labeled = false;
      unlabeled.push_back(std::move(copy));
    }
  }
  for (int i = 0; i < config.eval_scene_count; ++i) {
    Rng rng = root.fork(kGenEval, static_cast<uint64_t>(i));
    // eval scene ids live in their own block so they never collide
    eval_scenes.push_back(generate_scene(config.scene, 1000000 + i, true, rng));
  }

  atomic_write(config.paths.labeled_scenes, [&](std::ostream& out) { write_scenes(out, labeled); });
  atomic_write(config.paths.unlabeled_scenes,
               [&](std::ostream& out) { write_scenes(out, unlabeled); });
  atomic_write(config.paths.eval_scenes,
               [&](std::ostream& out) { write_scenes(out, eval_scenes); });

  if (!options.detections_out.empty()) {
    const TeacherOptions teacher = teacher_options(config);
    std::vector<SceneDetections> detections;
    for (const SceneSample& scene : unlabeled) {
      Rng rng = root.fork(kGenDetections, static_cast<uint64_t>(scene.scene_id));
      detections.push_back({scene.scene_id, teacher_predict(scene, teacher, rng)});
    }
    atomic_write(options.detections_out,
                 [&](std::ostream& out) { write_detections(out, detections); });
    log << "wrote " << detections.size() << " detection records to " << options.detections_out
        << "\n";
  }

  log << "wrote " << labeled.size() << " labeled scenes to " << config.paths.labeled_scenes << "\n"
      << "wrote " << unlabeled.size() << " unlabeled scenes to " << config.paths.unlabeled_scenes
      << "\n"
      << "wrote " << eval_scenes.size() << " eval scenes to " << config.paths.eval_scenes << "\n";
}

void cmd_pretrain(const RunConfig& config, std::ostream& log) {
  const std::vector<SceneSample> labeled = load_scenes_checked(config.paths.labeled_scenes);
  const PretrainResult result = run_pretrain(labeled, pretrain_options(config));

  atomic_write(config.paths.checkpoint, [&](std::ostream& out) {
    save_checkpoint(out, result.model);
  });
  atomic_write(report_path(config, "pretrain_report.csv").string(), [&](std::ostream& out) {
    out << "epoch,loss\n";
    for (size_t e = 0; e < result.report.epoch_losses.size(); ++e) {
      out << e << ',' << format_double(result.report.epoch_losses[e]) << '\n';
    }
  });

  log << "pretrained on " << result.report.sample_count << " samples from " << labeled.size()
      << " scenes\n";
  if (!result.report.epoch_losses.empty()) {
    log << "loss " << format_double(result.report.epoch_losses.front()) << " -> "
        << format_double(result.report.epoch_losses.back()) << " over "
        << result.report.epoch_losses.size() << " epochs\n";
  }
  log << "checkpoint written to " << config.paths.checkpoint << "\n";
}

void cmd_ssl(const RunConfig& config, std::ostream& log) {
  const std::vector<SceneSample> labeled = load_scenes_checked(config.paths.labeled_scenes);
  const std::vector<SceneSample> unlabeled = load_scenes_checked(config.paths.unlabeled_scenes);
  if (!std::filesystem::exists(config.paths.checkpoint)) {
    throw ConfigError("checkpoint does not exist (run pretrain first): " + config.paths.checkpoint);
  }
  const Checkpoint ckpt = load_checkpoint_file(config.paths.checkpoint);

  std::vector<SceneSample> eval_scenes;
  const std::vector<SceneSample>* eval_ptr = nullptr;
  if (std::filesystem::exists(config.paths.eval_scenes)) {
    eval_scenes = read_scenes_file(config.paths.eval_scenes);
    if (!eval_scenes.empty()) eval_ptr = &eval_scenes;
  }

  const SslResult result = run_ssl(labeled, unlabeled, ckpt.model, ssl_options(config), eval_ptr);

  atomic_write(report_path(config, "student.ckpt").string(), [&](std::ostream& out) {
    save_checkpoint(out, result.student.head,
                    std::span<const double>(result.student.side_bias.data(), kSideCount));
  });
  atomic_write(report_path(config, "teacher.ckpt").string(), [&](std::ostream& out) {
    save_checkpoint(out, result.teacher.head,
                    std::span<const double>(result.teacher.side_bias.data(), kSideCount));
  });
  atomic_write(report_path(config, "ssl_report.csv").string(),
               [&](std::ostream& out) { write_ssl_report(out, result, config); });

  log << "ssl stage finished after " << config.ssl_iterations << " iterations\n";
  if (!result.rows.empty() && !result.rows.back().mean_ap.empty()) {
    const SslCheckpointRow& last = result.rows.back();
    for (size_t t = 0; t < last.mean_ap.size(); ++t) {
      log << ap_column_name(config.eval_iou_thresholds[t]) << " "
          << format_double(last.mean_ap[t]) << "\n";
    }
  }
  log << "reports written to " << config.paths.report_dir << "\n";
}

void cmd_filter(const RunConfig& config, const std::string& detections_path,
                const std::string& output_path, std::ostream& log) {
  if (!std::filesystem::exists(detections_path)) {
    throw ConfigError("detections file does not exist: " + detections_path);
  }
  const std::vector<SceneDetections> scenes =
      read_detections_file(detections_path, side_ranges(config));

  CategoryThresholdState state(num_classes(config.scene));
  std::vector<ScenePseudoLabels> output;
  long in_count = 0, out_count = 0;
  for (const SceneDetections& scene : scenes) {
    in_count += static_cast<long>(scene.detections.size());
    ScenePseudoLabels labels;
    labels.scene_id = scene.scene_id;
    labels.labels = select_pseudo_labels(scene.detections, state, config.selection);
    out_count += static_cast<long>(labels.labels.size());
    output.push_back(std::move(labels));
  }
  atomic_write(output_path, [&](std::ostream& out) { write_pseudo_labels(out, output); });
  log << "kept " << out_count << " of " << in_count << " detections as pseudo-labels -> "
      << output_path << "\n";
}

void cmd_eval(const RunConfig& config, const EvalOptions& options, std::ostream& log) {
  if (options.ground_truth_path.empty()) {
    throw ConfigError("eval requires a ground-truth scene file (--gt)");
  }
  if (options.predictions_path.empty() && options.pseudo_labels_path.empty()) {
    throw ConfigError("eval requires --pred and/or --pseudo");
  }
  const std::vector<SceneSample> gt_scenes = load_scenes_checked(options.ground_truth_path);
  const std::vector<SceneGroundTruth> gts = to_ground_truth(gt_scenes);

  json summary;
  summary["ground_truth"] = options.ground_truth_path;

  if (!options.predictions_path.empty()) {
    if (!std::filesystem::exists(options.predictions_path)) {
      throw ConfigError("detections file does not exist: " + options.predictions_path);
    }
    const std::vector<SceneDetections> det_scenes =
        read_detections_file(options.predictions_path, side_ranges(config));
    std::vector<ScenePredictions> preds;
    for (const SceneDetections& scene : det_scenes) {
      ScenePredictions sp;
      sp.scene_id = scene.scene_id;
      for (const Detection& det : scene.detections) {
        sp.preds.push_back(
            {det.box, det.class_id, det.objectness * det.class_scores[det.class_id]});
      }
      preds.push_back(std::move(sp));
    }
    const ApResult ap = average_precision(preds, gts, config.eval_iou_thresholds,
                                          num_classes(config.scene));

    atomic_write(report_path(config, "ap_table.csv").string(), [&](std::ostream& out) {
      out << "iou_threshold,class,ap\n";
      for (size_t t = 0; t < ap.iou_thresholds.size(); ++t) {
        for (size_t c = 0; c < ap.per_class_ap[t].size(); ++c) {
          out << format_double(ap.iou_thresholds[t]) << ',' << c << ','
              << (std::isnan(ap.per_class_ap[t][c]) ? "nan"
                                                    : format_double(ap.per_class_ap[t][c]))
              << '\n';
        }
        out << format_double(ap.iou_thresholds[t]) << ",mean," << format_double(ap.mean_ap[t])
            << '\n';
      }
    });
    json ap_json;
    for (size_t t = 0; t < ap.iou_thresholds.size(); ++t) {
      ap_json[ap_column_name(ap.iou_thresholds[t])] = ap.mean_ap[t];
    }
    summary["mean_ap"] = ap_json;
    for (size_t t = 0; t < ap.iou_thresholds.size(); ++t) {
      log << ap_column_name(ap.iou_thresholds[t]) << " " << format_double(ap.mean_ap[t]) << "\n";
    }
  }

  if (!options.pseudo_labels_path.empty()) {
    if (!std::filesystem::exists(options.pseudo_labels_path)) {
      throw ConfigError("pseudo-label file does not exist: " + options.pseudo_labels_path);
    }
    const std::vector<ScenePseudoLabels> pls = read_pseudo_labels_file(options.pseudo_labels_path);
    const SideQualityReport report =
        side_error_stats(pls, gts, config.eval_match_iou, config.side_error_threshold,
                         num_classes(config.scene));
    json side;
    side["good_side_count"] = report.good_side_count;
    side["bad_side_count"] = report.bad_side_count;
    side["matched_pseudo_labels"] = report.matched_pseudo_labels;
    side["recall"] = report.recall;
    side["weighted_mean_side_error"] = report.weighted_mean_side_error;
    side["unweighted_mean_side_error"] = report.unweighted_mean_side_error;
    json per_class = json::array();
    for (size_t c = 0; c < report.per_class.size(); ++c) {
      json entry;
      entry["class"] = c;
      entry["good_sides"] = report.per_class[c].good_sides;
      entry["bad_sides"] = report.per_class[c].bad_sides;
      entry["matches"] = report.per_class[c].matches;
      per_class.push_back(entry);
    }
    side["per_class"] = per_class;
    summary["side_quality"] = side;
    log << "side quality: " << report.good_side_count << " good / " << report.bad_side_count
        << " bad sides, recall " << format_double(report.recall) << "\n";
  }

  atomic_write(report_path(config, "eval_summary.json").string(),
               [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  log << "summary written to " << report_path(config, "eval_summary.json").string() << "\n";
}

void cmd_report(const std::string& report_path_in, std::ostream& log) {
  if (!std::filesystem::exists(report_path_in)) {
    throw ConfigError("report file does not exist: " + report_path_in);
  }
  std::ifstream in(report_path_in);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty report file");

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }

  log << "report: " << report_path_in << "\n";
  log << "columns: " << header << "\n";
  log << "rows: " << rows.size() << "\n";
  if (!rows.empty()) {
    log << "first: ";
    for (size_t i = 0; i < rows.front().size(); ++i) log << (i ? "," : "") << rows.front()[i];
    log << "\nlast:  ";
    for (size_t i = 0; i < rows.back().size(); ++i) log << (i ? "," : "") << rows.back()[i];
    log << "\n";
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"side-aware pseudo-label selection workbench"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string write_config_path;
  bool has_seed_override = false;
  uint64_t seed_override = 0;

  app.add_option("-c,--config", config_path, "run configuration file (JSON, // comments allowed)");
  app.add_option("--write-config", write_config_path,
                 "write the commented default configuration to PATH and exit");
  app.add_option("--seed", seed_override, "override the config seed")
      ->each([&](const std::string&) { has_seed_override = true; });

  GenOptions gen_options;
  CLI::App* gen = app.add_subcommand("gen", "generate scene splits");
  gen->add_option("--detections", gen_options.detections_out,
                  "also write synthetic detections for the unlabeled split");

  CLI::App* pretrain = app.add_subcommand("pretrain", "fit the uncertainty head on labeled scenes");

  CLI::App* ssl = app.add_subcommand("ssl", "run the semi-supervised stage");

  std::string filter_in, filter_out = "pseudo_labels.jsonl";
  CLI::App* filter = app.add_subcommand("filter", "select pseudo-labels from a detections file");
  filter->add_option("--detections", filter_in, "input detections file")->required();
  filter->add_option("--out", filter_out, "output pseudo-label file");

  EvalOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--pred", eval_options.predictions_path, "detections file for AP");
  eval->add_option("--pseudo", eval_options.pseudo_labels_path,
                   "pseudo-label file for side statistics");
  eval->add_option("--gt", eval_options.ground_truth_path, "ground-truth scene file")->required();

  std::string report_file;
  CLI::App* report = app.add_subcommand("report", "summarize a saved report CSV");
  report->add_option("file", report_file, "report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      log << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (!write_config_path.empty()) {
      atomic_write(write_config_path, [](std::ostream& out) { out << default_config_text(); });
      log << "default configuration written to " << write_config_path << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      log << app.help();
      return 0;
    }

    RunConfig config;
    if (report->parsed()) {
      cmd_report(report_file, log);
      return 0;
    }
    if (config_path.empty()) {
      throw ConfigError("a config file is required (--config PATH); "
                        "use --write-config to create a template");
    }
    config = load_run_config(config_path);
    if (has_seed_override) config.seed = seed_override;

    if (gen->parsed()) {
      cmd_gen(config, gen_options, log);
    } else if (pretrain->parsed()) {
      cmd_pretrain(config, log);
    } else if (ssl->parsed()) {
      cmd_ssl(config, log);
    } else if (filter->parsed()) {
      cmd_filter(config, filter_in, filter_out, log);
    } else if (eval->parsed()) {
      cmd_eval(config, eval_options, log);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace sideaware::cli
