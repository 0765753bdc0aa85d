// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic detector: produces noisy side-parameterized detections for a
// scene's ground truth. Per-side errors are driven by the face observability
// encoded in the seed features, so detection quality is readable from the
// scene geometry: a face whose observability falls below the corruption
// probability is corrupted by a large outward overshoot (the marginal
// corruption rate equals that probability because observability is uniform
// at generation), and the gaussian error and distribution sharpness degrade
// as observability drops.
#ifndef SIDEAWARE_TEACHER_HPP_
#define SIDEAWARE_TEACHER_HPP_

#include "sideaware/scene.hpp"
#include "sideaware/soft_pls.hpp"
#include "sideaware/uncertainty.hpp"

namespace sideaware {

struct NoiseModel {
  SideArray side_std{0.015, 0.015, 0.015, 0.015, 0.015, 0.015};  // base gaussian error
  double side_std_gain = 0.05;       // extra std scaled by (1 - observability)
  SideArray side_bias{};             // systematic per-side error (meters)
  SideArray corruption_prob{};       // observability threshold per side
  SideArray corruption_magnitude{0.8, 0.8, 0.8, 0.8, 0.8, 0.8};
  double yaw_std = 0.0;              // yaw perturbation (radians)
  double candidate_jitter = 0.08;    // candidate offset, fraction of box size
  double score_std = 0.02;           // objectness noise
  double iou_score_std = 0.03;       // predicted-IoU perturbation
  double class_logit_noise = 0.5;    // class-score spread
  double duplicate_rate = 0.0;       // chance of a second detection per box
  double spurious_rate = 0.0;        // chance of an unmatched detection per box
  double sharpness_base = 400.0;     // distribution sharpness at observability 1
  double logit_noise_std = 0.25;     // distribution logit noise, scaled by (1 - obs)
  uint64_t seed = 0;                 // stream tag for callers that derive an rng
};

void validate(const NoiseModel& noise);

struct TeacherOptions {
  NoiseModel noise;
  SideRangeSet ranges = default_indoor_ranges();
  int num_classes = 3;
  double label_scale = 4.0;          // uncertainty label saturation slope
  bool oracle_uncertainty = true;    // false: use `model` to predict uncertainties
  const UncertaintyModel* model = nullptr;
  int side_point_grid = 4;
  int k_nn = 3;
  int top_k = 4;
};

/// Oracle per-side uncertainties: clipped scaled absolute deviation of each
/// side against the best-overlapping ground truth, clamped into (0, 1).
/// Every side saturates to ~1 when no ground truth aligns with the
/// detection's frame.
SideArray oracle_side_uncertainties(const Detection& det, const SceneSample& scene,
                                    double label_scale);

/// One detection per ground-truth box (plus duplicates and spurious boxes at
/// the configured rates). Each side's distribution is built around the
/// ground-truth distance plus the drawn error, the box is reassembled from
/// the distribution expectations, and scores/IoU are the true values under
/// mild noise. Deterministic given (scene, options, rng state).
/// `source_gt` (optional) receives, per detection, the index of the ground
/// truth it was synthesized from, or -1 for spurious detections.
std::vector<Detection> teacher_predict(const SceneSample& scene, const TeacherOptions& options,
                                       Rng& rng, std::vector<int>* source_gt = nullptr);

}  // namespace sideaware

#endif  // SIDEAWARE_TEACHER_HPP_
