// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sideaware {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// One object section of the config. Tracks consumed keys so that leftovers
/// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("config: " + label() + " must be an object");
  }

  bool has(const char* key) {
    return j_.contains(key);
  }

  double number(const char* key, double fallback, double lo, double hi, bool lo_open = false) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError("config: " + path(key) + " must be a number");
    const double x = v.get<double>();
    check_range(key, x, lo, hi, lo_open);
    return x;
  }

  int integer(const char* key, int fallback, int lo, int hi) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError("config: " + path(key) + " must be an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      throw ConfigError("config: " + path(key) + " must be in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] (got " + std::to_string(x) + ")");
    }
    return static_cast<int>(x);
  }

  uint64_t unsigned64(const char* key, uint64_t fallback) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      throw ConfigError("config: " + path(key) + " must be a nonnegative integer");
    }
    if (v.is_number_integer() && v.get<long long>() < 0) {
      throw ConfigError("config: " + path(key) + " must be a nonnegative integer");
    }
    return v.get<uint64_t>();
  }

  bool boolean(const char* key, bool fallback) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError("config: " + path(key) + " must be a boolean");
    return v.get<bool>();
  }

  std::string str(const char* key, const std::string& fallback) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError("config: " + path(key) + " must be a string");
    const std::string s = v.get<std::string>();
    if (s.empty()) throw ConfigError("config: " + path(key) + " must not be empty");
    return s;
  }

  /// [lo, hi] pair with lo < hi.
  void interval(const char* key, double& lo_out, double& hi_out, double lo, double hi) {
    if (!j_.contains(key)) return;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError("config: " + path(key) + " must be a [min, max] number pair");
    }
    const double a = v[0].get<double>();
    const double b = v[1].get<double>();
    check_range(key, a, lo, hi, false);
    check_range(key, b, lo, hi, false);
    if (a >= b) throw ConfigError("config: " + path(key) + " requires min < max");
    lo_out = a;
    hi_out = b;
  }

  /// Scalar broadcast or a 6-element array ordered top,down,left,right,front,back.
  SideArray side_values(const char* key, const SideArray& fallback, double lo, double hi) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    SideArray out{};
    if (v.is_number()) {
      const double x = v.get<double>();
      check_range(key, x, lo, hi, false);
      out.fill(x);
      return out;
    }
    if (!v.is_array() || v.size() != kSideCount) {
      throw ConfigError("config: " + path(key) + " must be a number or a 6-element array " +
                        "(order: top, down, left, right, front, back)");
    }
    for (int s = 0; s < kSideCount; ++s) {
      if (!v[s].is_number()) throw ConfigError("config: " + path(key) + " entries must be numbers");
      const double x = v[s].get<double>();
      check_range(key, x, lo, hi, false);
      out[s] = x;
    }
    return out;
  }

  std::vector<double> number_list(const char* key, const std::vector<double>& fallback, double lo,
                                  double hi) {
    if (!j_.contains(key)) return fallback;
    consume(key);
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) {
      throw ConfigError("config: " + path(key) + " must be a nonempty array of numbers");
    }
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError("config: " + path(key) + " entries must be numbers");
      const double x = e.get<double>();
      check_range(key, x, lo, hi, false);
      out.push_back(x);
    }
    return out;
  }

  Section subsection(const char* key) {
    consume(key);
    return Section(j_.at(key), path(key));
  }

  bool has_subsection(const char* key) const { return j_.contains(key) && j_.at(key).is_object(); }

  /// Call after all reads: rejects any key that was never consumed.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!consumed_.count(item.key())) {
        throw ConfigError("config: unknown key '" + path(item.key().c_str()) + "'");
      }
    }
  }

 private:
  std::string label() const { return prefix_.empty() ? std::string("document root") : prefix_; }

  std::string path(const char* key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + key;
  }

  void consume(const char* key) { consumed_.insert(key); }

  void check_range(const char* key, double x, double lo, double hi, bool lo_open) const {
    if (!std::isfinite(x) || x < lo || x > hi || (lo_open && x == lo)) {
      std::ostringstream msg;
      msg << "config: " << path(key) << " must be in " << (lo_open ? "(" : "[") << lo << ", " << hi
          << "] (got " << x << ")";
      throw ConfigError(msg.str());
    }
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> consumed_;
};

NoiseModel parse_noise(Section& section, const NoiseModel& defaults) {
  NoiseModel noise = defaults;
  noise.side_std = section.side_values("side_std", defaults.side_std, 0.0, 10.0);
  noise.side_std_gain = section.number("side_std_gain", defaults.side_std_gain, 0.0, 10.0);
  noise.side_bias = section.side_values("side_bias", defaults.side_bias, -3.0, 3.0);
  noise.corruption_prob = section.side_values("corruption_prob", defaults.corruption_prob, 0.0, 1.0);
  noise.corruption_magnitude =
      section.side_values("corruption_magnitude", defaults.corruption_magnitude, 0.0, 3.0);
  noise.yaw_std = section.number("yaw_std", defaults.yaw_std, 0.0, 0.5);
  noise.candidate_jitter = section.number("candidate_jitter", defaults.candidate_jitter, 0.0, 0.49);
  noise.score_std = section.number("score_std", defaults.score_std, 0.0, 1.0);
  noise.iou_score_std = section.number("iou_score_std", defaults.iou_score_std, 0.0, 1.0);
  noise.class_logit_noise = section.number("class_logit_noise", defaults.class_logit_noise, 0.0, 10.0);
  noise.duplicate_rate = section.number("duplicate_rate", defaults.duplicate_rate, 0.0, 1.0);
  noise.spurious_rate = section.number("spurious_rate", defaults.spurious_rate, 0.0, 1.0);
  noise.sharpness_base = section.number("sharpness_base", defaults.sharpness_base, 1e-6, 1e9);
  noise.logit_noise_std = section.number("logit_noise_std", defaults.logit_noise_std, 0.0, 10.0);
  section.finish();
  return noise;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig config;
  config.scene = default_scene_config();
  // pseudo-label pass: systematic per-side bias plus observability-gated
  // corruption; the student pass sees the bias but not the corruption
  config.noise.side_bias = {0.08, 0.12, 0.10, 0.14, 0.30, 0.26};
  config.noise.corruption_prob.fill(0.3);
  config.noise.duplicate_rate = 0.3;
  config.noise.spurious_rate = 0.1;
  config.student_noise = config.noise;
  config.student_noise.corruption_prob.fill(0.0);
  config.student_noise.duplicate_rate = 0.0;
  config.student_noise.spurious_rate = 0.05;
  config.selection.fixed_iou_per_class = {0.7, 0.3, 0.5};
  return config;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }

  RunConfig config = default_run_config();
  Section root(j, "");

  config.seed = root.unsigned64("seed", config.seed);

  if (root.has("paths")) {
    Section s = root.subsection("paths");
    config.paths.labeled_scenes = s.str("labeled_scenes", config.paths.labeled_scenes);
    config.paths.unlabeled_scenes = s.str("unlabeled_scenes", config.paths.unlabeled_scenes);
    config.paths.eval_scenes = s.str("eval_scenes", config.paths.eval_scenes);
    config.paths.checkpoint = s.str("checkpoint", config.paths.checkpoint);
    config.paths.report_dir = s.str("report_dir", config.paths.report_dir);
    s.finish();
  }

  if (root.has("sides")) {
    Section s = root.subsection("sides");
    config.bins = s.integer("bins", config.bins, 2, 4096);
    s.interval("front_back_range", config.front_back_min, config.front_back_max, 0.0, 100.0);
    s.interval("left_right_range", config.left_right_min, config.left_right_max, 0.0, 100.0);
    s.interval("top_down_range", config.top_down_min, config.top_down_max, 0.0, 100.0);
    config.top_k = s.integer("top_k", config.top_k, 1, config.bins);
    s.finish();
  }

  if (root.has("uncertainty")) {
    Section s = root.subsection("uncertainty");
    config.label_scale = s.number("label_scale", config.label_scale, 1e-9, 1e6, true);
    config.pointnet_dim = s.integer("pointnet_dim", config.pointnet_dim, 1, 4096);
    config.hidden_dim = s.integer("hidden_dim", config.hidden_dim, 1, 4096);
    config.side_point_grid = s.integer("side_point_grid", config.side_point_grid, 1, 64);
    config.k_nn = s.integer("k_nn", config.k_nn, 1, 64);
    s.finish();
  }

  if (root.has("selection")) {
    Section s = root.subsection("selection");
    config.selection.quality_decay = s.number("quality_decay", config.selection.quality_decay, 0.0, 100.0);
    config.selection.tau_objectness =
        s.number("tau_objectness", config.selection.tau_objectness, 0.0, 1.0);
    s.interval("cls_bounds", config.selection.cls_bounds.tau_min,
               config.selection.cls_bounds.tau_max, 0.0, 1.0);
    s.interval("iou_bounds", config.selection.iou_bounds.tau_min,
               config.selection.iou_bounds.tau_max, 0.0, 1.0);
    config.selection.adaptive = s.boolean("adaptive", config.selection.adaptive);
    config.selection.fixed_cls_threshold =
        s.number("fixed_cls_threshold", config.selection.fixed_cls_threshold, 0.0, 1.0);
    config.selection.fixed_iou_per_class = s.number_list(
        "fixed_iou_per_class", config.selection.fixed_iou_per_class, 0.0, 1.0);
    config.selection.nms_overlap_threshold =
        s.number("nms_overlap", config.selection.nms_overlap_threshold, 1e-9, 1.0 - 1e-9);
    s.finish();
  }

  if (root.has("scene")) {
    Section s = root.subsection("scene");
    config.scene_count = s.integer("count", config.scene_count, 1, 1000000);
    config.labeled_ratio = s.number("labeled_ratio", config.labeled_ratio, 0.0, 1.0);
    config.eval_scene_count = s.integer("eval_count", config.eval_scene_count, 0, 1000000);
    config.scene.arena_half_extent =
        s.number("arena_half_extent", config.scene.arena_half_extent, 0.5, 1000.0);
    config.scene.min_boxes = s.integer("min_boxes", config.scene.min_boxes, 1, 64);
    config.scene.max_boxes = s.integer("max_boxes", config.scene.max_boxes, 1, 64);
    config.scene.seeds_per_face = s.integer("seeds_per_face", config.scene.seeds_per_face, 1, 256);
    config.scene.background_seeds =
        s.integer("background_seeds", config.scene.background_seeds, 0, 100000);
    s.finish();
    if (config.scene.max_boxes < config.scene.min_boxes) {
      throw ConfigError("config: scene.max_boxes must be >= scene.min_boxes");
    }
  }

  if (root.has("noise")) {
    Section s = root.subsection("noise");
    config.noise = parse_noise(s, config.noise);
  }
  if (root.has("student_noise")) {
    Section s = root.subsection("student_noise");
    config.student_noise = parse_noise(s, config.student_noise);
  }

  if (root.has("train")) {
    Section s = root.subsection("train");
    config.pretrain_epochs = s.integer("pretrain_epochs", config.pretrain_epochs, 0, 1000000);
    config.pretrain_lr = s.number("pretrain_lr", config.pretrain_lr, 0.0, 1000.0);
    config.batch_size = s.integer("batch_size", config.batch_size, 1, 1000000);
    config.ssl_iterations = s.integer("ssl_iterations", config.ssl_iterations, 0, 10000000);
    config.labeled_per_iter = s.integer("labeled_per_iter", config.labeled_per_iter, 1, 1024);
    config.unlabeled_per_iter = s.integer("unlabeled_per_iter", config.unlabeled_per_iter, 1, 1024);
    config.bias_lr = s.number("bias_lr", config.bias_lr, 0.0, 1000.0);
    config.head_lr = s.number("head_lr", config.head_lr, 0.0, 1000.0);
    config.beta = s.number("beta", config.beta, 0.0, 1000.0);
    config.ema_momentum = s.number("ema_momentum", config.ema_momentum, 0.0, 1.0 - 1e-12);
    config.side_aware_weighting = s.boolean("side_aware_weighting", config.side_aware_weighting);
    config.oracle_pseudo_uncertainty =
        s.boolean("oracle_pseudo_uncertainty", config.oracle_pseudo_uncertainty);
    config.checkpoint_interval = s.integer("checkpoint_interval", config.checkpoint_interval, 1, 1000000);
    config.counter_reset_interval =
        s.integer("counter_reset_interval", config.counter_reset_interval, 0, 1000000);
    config.aug_max_translation = s.number("aug_max_translation", config.aug_max_translation, 0.0, 100.0);
    config.smooth_l1_delta = s.number("smooth_l1_delta", config.smooth_l1_delta, 1e-9, 100.0, true);
    config.match_iou = s.number("match_iou", config.match_iou, 0.0, 1.0);
    s.finish();
  }

  if (root.has("eval")) {
    Section s = root.subsection("eval");
    config.eval_iou_thresholds =
        s.number_list("iou_thresholds", config.eval_iou_thresholds, 0.0, 1.0);
    config.side_error_threshold =
        s.number("side_error_threshold", config.side_error_threshold, 0.0, 100.0);
    config.eval_match_iou = s.number("match_iou", config.eval_match_iou, 0.0, 1.0);
    s.finish();
  }

  root.finish();

  if (!config.selection.adaptive &&
      static_cast<int>(config.selection.fixed_iou_per_class.size()) < num_classes(config.scene)) {
    throw ConfigError(
        "config: selection.fixed_iou_per_class needs one entry per class when adaptive is false");
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

SideRangeSet side_ranges(const RunConfig& config) {
  SideRangeSet ranges;
  const SideRange front_back = make_range(config.front_back_min, config.front_back_max, config.bins);
  const SideRange left_right = make_range(config.left_right_min, config.left_right_max, config.bins);
  const SideRange top_down = make_range(config.top_down_min, config.top_down_max, config.bins);
  ranges[side_index(Side::kFront)] = front_back;
  ranges[side_index(Side::kBack)] = front_back;
  ranges[side_index(Side::kLeft)] = left_right;
  ranges[side_index(Side::kRight)] = left_right;
  ranges[side_index(Side::kTop)] = top_down;
  ranges[side_index(Side::kDown)] = top_down;
  return ranges;
}

ModelShape model_shape(const RunConfig& config) {
  return {kSeedFeatureDim + 3, config.pointnet_dim, config.bins + 2, config.hidden_dim};
}

TeacherOptions teacher_options(const RunConfig& config) {
  TeacherOptions options;
  options.noise = config.noise;
  options.ranges = side_ranges(config);
  options.num_classes = num_classes(config.scene);
  options.label_scale = config.label_scale;
  options.oracle_uncertainty = true;
  options.side_point_grid = config.side_point_grid;
  options.k_nn = config.k_nn;
  options.top_k = config.top_k;
  return options;
}

PretrainOptions pretrain_options(const RunConfig& config) {
  PretrainOptions options;
  options.teacher = teacher_options(config);
  options.shape = model_shape(config);
  options.epochs = config.pretrain_epochs;
  options.batch_size = config.batch_size;
  options.learning_rate = config.pretrain_lr;
  options.match_iou = config.match_iou;
  options.seed = config.seed;
  return options;
}

SslOptions ssl_options(const RunConfig& config) {
  SslOptions options;
  options.teacher = teacher_options(config);
  options.student_noise = config.student_noise;
  options.selection = config.selection;
  options.loss.smooth_l1_delta = config.smooth_l1_delta;
  options.loss.beta = config.beta;
  options.loss.sampling_ratio =
      static_cast<double>(config.labeled_per_iter) / static_cast<double>(config.unlabeled_per_iter);
  options.iterations = config.ssl_iterations;
  options.labeled_per_iter = config.labeled_per_iter;
  options.unlabeled_per_iter = config.unlabeled_per_iter;
  options.bias_learning_rate = config.bias_lr;
  options.head_learning_rate = config.head_lr;
  options.ema_momentum = config.ema_momentum;
  options.match_iou = config.match_iou;
  options.side_aware_weighting = config.side_aware_weighting;
  options.oracle_pseudo_uncertainty = config.oracle_pseudo_uncertainty;
  options.checkpoint_interval = config.checkpoint_interval;
  options.counter_reset_interval = config.counter_reset_interval;
  options.aug_max_translation = config.aug_max_translation;
  options.seed = config.seed;
  options.eval_iou_thresholds = config.eval_iou_thresholds;
  return options;
}

std::string default_config_text() {
  return R"CFG({
  // sideaware run configuration. All values shown are the defaults; delete
  // anything you do not want to override. Distances are meters, angles
  // radians. Per-side arrays are ordered [top, down, left, right, front, back].
  "seed": 1,
  "paths": {
    "labeled_scenes": "out/labeled.jsonl",
    "unlabeled_scenes": "out/unlabeled.jsonl",
    "eval_scenes": "out/eval.jsonl",
    "checkpoint": "out/model.ckpt",
    "report_dir": "out"
  },
  "sides": {
    // discretization of each side's distance range; an outdoor-style setup
    // would use e.g. [0, 0.4] front/back and [0, 0.3] for the rest
    "bins": 32,
    "front_back_range": [0.0, 3.5],
    "left_right_range": [0.0, 3.5],
    "top_down_range": [0.0, 2.0],
    "top_k": 4                        // top-k stats fed to the uncertainty head
  },
  "uncertainty": {
    "label_scale": 4.0,      // a side error of 1/label_scale meters saturates the label
    "pointnet_dim": 32,      // pooled geometry feature width
    "hidden_dim": 64,        // head hidden width
    "side_point_grid": 4,    // grid x grid points sampled per face
    "k_nn": 3                // neighbors for feature interpolation
  },
  "selection": {
    "quality_decay": 5.0,      // side quality = exp(-quality_decay * uncertainty)
    "tau_objectness": 0.8,     // class-agnostic objectness gate
    "cls_bounds": [0.7, 0.9],  // adaptive class-score threshold range
    "iou_bounds": [0.15, 0.25],// adaptive predicted-IoU threshold range
    "adaptive": true,          // false: fixed thresholds below
    "fixed_cls_threshold": 0.15,
    "fixed_iou_per_class": [0.7, 0.3, 0.5],
    "nms_overlap": 0.25        // clustering overlap for low-half NMS
  },
  "scene": {
    "count": 100,            // scenes produced by `gen`
    "labeled_ratio": 0.2,    // fraction written to the labeled split
    "eval_count": 20,        // held-out scenes for evaluation
    "arena_half_extent": 4.0,
    "min_boxes": 2,
    "max_boxes": 4,
    "seeds_per_face": 6,
    "background_seeds": 40
  },
  // error profile of the pseudo-label generation pass: systematic per-side
  // bias, observability-driven gaussian error, and large outward corruption
  // on faces whose observability drops below corruption_prob
  "noise": {
    "side_std": 0.015,
    "side_std_gain": 0.05,
    "side_bias": [0.08, 0.12, 0.10, 0.14, 0.30, 0.26],
    "corruption_prob": 0.3,
    "corruption_magnitude": 0.8,
    "yaw_std": 0.0,
    "candidate_jitter": 0.08,
    "score_std": 0.02,
    "iou_score_std": 0.03,
    "class_logit_noise": 0.5,
    "duplicate_rate": 0.3,
    "spurious_rate": 0.1,
    "sharpness_base": 400.0,
    "logit_noise_std": 0.25
  },
  // error profile of the student's own raw predictions (same bias, no
  // corruption, fewer phantom boxes)
  "student_noise": {
    "side_std": 0.015,
    "side_std_gain": 0.05,
    "side_bias": [0.08, 0.12, 0.10, 0.14, 0.30, 0.26],
    "corruption_prob": 0.0,
    "corruption_magnitude": 0.8,
    "yaw_std": 0.0,
    "candidate_jitter": 0.08,
    "score_std": 0.02,
    "iou_score_std": 0.03,
    "class_logit_noise": 0.5,
    "duplicate_rate": 0.0,
    "spurious_rate": 0.05,
    "sharpness_base": 400.0,
    "logit_noise_std": 0.25
  },
  "train": {
    "pretrain_epochs": 60,
    "pretrain_lr": 0.5,
    "batch_size": 128,
    "ssl_iterations": 300,
    "labeled_per_iter": 1,
    "unlabeled_per_iter": 1,
    "bias_lr": 0.05,             // step size for the per-side correction
    "head_lr": 0.2,              // step size for the uncertainty head
    "beta": 1.0,                 // unsupervised loss weight
    "ema_momentum": 0.99,
    "side_aware_weighting": true,   // false: every pseudo-label side weighs 1
    "oracle_pseudo_uncertainty": false, // true: quality from ground-truth errors
    "checkpoint_interval": 50,
    "counter_reset_interval": 100,  // class counters reset every k iterations
    "aug_max_translation": 0.5,
    "smooth_l1_delta": 1.0,
    "match_iou": 0.25
  },
  "eval": {
    "iou_thresholds": [0.25, 0.5],
    "side_error_threshold": 0.1,
    "match_iou": 0.25
  }
}
)CFG";
}

}  // namespace sideaware
