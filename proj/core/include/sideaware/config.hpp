// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON document (// comments allowed) validated
// field-by-field on load. Unknown keys are rejected and every violation
// names the offending key.
#ifndef SIDEAWARE_CONFIG_HPP_
#define SIDEAWARE_CONFIG_HPP_

#include <stdexcept>
#include <string>

#include "sideaware/scene.hpp"
#include "sideaware/teacher.hpp"
#include "sideaware/training.hpp"

namespace sideaware {

/// Configuration problems (bad value, unknown key, unreadable file). The CLI
/// maps these to exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunPaths {
  std::string labeled_scenes = "out/labeled.jsonl";
  std::string unlabeled_scenes = "out/unlabeled.jsonl";
  std::string eval_scenes = "out/eval.jsonl";
  std::string checkpoint = "out/model.ckpt";
  std::string report_dir = "out";
};

struct RunConfig {
  uint64_t seed = 1;
  RunPaths paths;

  // side parameterization; the three groups allow outdoor-style setups
  // where front/back spans differ from left/right
  int bins = 32;
  double front_back_min = 0.0, front_back_max = 3.5;
  double left_right_min = 0.0, left_right_max = 3.5;
  double top_down_min = 0.0, top_down_max = 2.0;
  int top_k = 4;

  // uncertainty head
  double label_scale = 4.0;
  int pointnet_dim = 32;
  int hidden_dim = 64;
  int side_point_grid = 4;
  int k_nn = 3;

  SelectionConfig selection;

  // scenes
  SceneConfig scene;
  int scene_count = 100;
  double labeled_ratio = 0.2;
  int eval_scene_count = 20;

  NoiseModel noise;          // pseudo-label generation pass
  NoiseModel student_noise;  // student raw-prediction pass

  // training
  int pretrain_epochs = 60;
  double pretrain_lr = 0.5;
  int batch_size = 128;
  int ssl_iterations = 300;
  int labeled_per_iter = 1;
  int unlabeled_per_iter = 1;
  double bias_lr = 0.05;
  double head_lr = 0.2;
  double beta = 1.0;
  double ema_momentum = 0.99;
  bool side_aware_weighting = true;
  bool oracle_pseudo_uncertainty = false;
  int checkpoint_interval = 50;
  int counter_reset_interval = 100;
  double aug_max_translation = 0.5;
  double smooth_l1_delta = 1.0;
  double match_iou = 0.25;

  // evaluation
  std::vector<double> eval_iou_thresholds{0.25, 0.5};
  double side_error_threshold = 0.1;
  double eval_match_iou = 0.25;
};

RunConfig default_run_config();

/// Parses and validates a config document. Throws ConfigError naming the
/// offending key on any violation.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// The commented default configuration template (valid input for
/// parse_run_config).
std::string default_config_text();

// Library option structs assembled from a validated config.
SideRangeSet side_ranges(const RunConfig& config);
ModelShape model_shape(const RunConfig& config);
TeacherOptions teacher_options(const RunConfig& config);
PretrainOptions pretrain_options(const RunConfig& config);
SslOptions ssl_options(const RunConfig& config);

}  // namespace sideaware

#endif  // SIDEAWARE_CONFIG_HPP_
