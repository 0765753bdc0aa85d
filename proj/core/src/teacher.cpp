// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/teacher.hpp"

#include <algorithm>
#include <stdexcept>

namespace sideaware {

namespace {

constexpr double kUncertaintyEps = 1e-6;

/// Builds one noisy detection for `gt`. `quality_scale` > 1 degrades the
/// draw (used for duplicates).
Detection synthesize_detection(const SceneSample& scene, const GtBox& gt,
                               const TeacherOptions& options, double quality_scale, Rng& rng) {
  const NoiseModel& noise = options.noise;
  const OrientedBox3& box = gt.box;

  // candidate point: jittered off the ground-truth center, in the box frame
  const Vec3 local_jitter{rng.uniform(-1.0, 1.0) * noise.candidate_jitter * box.size.x,
                          rng.uniform(-1.0, 1.0) * noise.candidate_jitter * box.size.y,
                          rng.uniform(-1.0, 1.0) * noise.candidate_jitter * box.size.z};
  const Vec3 candidate = box.center + rotate_z(local_jitter, box.yaw);
  const double yaw = normalize_angle(box.yaw + rng.gaussian(0.0, noise.yaw_std));

  const SideArray gt_sides = side_targets_in_frame(candidate, yaw, box);

  Detection det;
  det.candidate = candidate;

  SideDistances expected;
  expected.candidate = candidate;
  expected.yaw = yaw;
  for (Side side : kAllSides) {
    const int s = side_index(side);
    const double observability = face_observability(scene, box, side, options.side_point_grid,
                                                    options.k_nn);
    double error = noise.side_bias[s] +
                   rng.gaussian(0.0, quality_scale * (noise.side_std[s] +
                                                      noise.side_std_gain * (1.0 - observability)));
    if (observability < noise.corruption_prob[s]) {
      error += noise.corruption_magnitude[s] * rng.uniform(0.5, 1.5);
    }
    const SideRange& range = options.ranges[s];
    const double margin = bin_width(range);
    const double target = std::clamp(gt_sides[s] + error, range.s_min + margin,
                                     range.s_max - margin);
    const double sharpness = noise.sharpness_base * (0.35 + 0.65 * observability);
    det.side_dists[s] = synthetic_distribution(
        target, sharpness, 0.0, range, rng,
        noise.logit_noise_std * (0.2 + 0.8 * (1.0 - observability)));
    expected.distance[s] = expected_value(det.side_dists[s]);
  }
  det.box = box_from_sides(expected);

  det.predicted_iou =
      std::clamp(rotated_iou(det.box, box) + rng.gaussian(0.0, noise.iou_score_std), 0.0, 1.0);
  det.objectness = std::clamp(0.97 - std::abs(rng.gaussian(0.0, noise.score_std)) -
                                  0.05 * (quality_scale - 1.0),
                              0.0, 1.0);

  std::vector<double> class_logits(options.num_classes);
  for (int c = 0; c < options.num_classes; ++c) {
    class_logits[c] = rng.gaussian(0.0, noise.class_logit_noise);
  }
  class_logits[gt.class_id] += 4.0;
  const double max_logit = *std::max_element(class_logits.begin(), class_logits.end());
  double total = 0.0;
  det.class_scores.resize(options.num_classes);
  for (int c = 0; c < options.num_classes; ++c) {
    det.class_scores[c] = std::exp(class_logits[c] - max_logit);
    total += det.class_scores[c];
  }
  for (double& p : det.class_scores) p /= total;
  finalize_class_id(det);
  return det;
}

void fill_uncertainty(Detection& det, const SceneSample& scene, const TeacherOptions& options) {
  if (options.oracle_uncertainty) {
    det.side_uncertainty = oracle_side_uncertainties(det, scene, options.label_scale);
  } else {
    if (options.model == nullptr) {
      throw std::invalid_argument("teacher options: model-predicted uncertainty requires a model");
    }
    for (Side side : kAllSides) {
      const int s = side_index(side);
      const double u = options.model->predict_side(det.box, side, det.side_dists[s], scene.seeds,
                                                   options.side_point_grid, options.k_nn,
                                                   options.top_k);
      det.side_uncertainty[s] = std::clamp(u, kUncertaintyEps, 1.0 - kUncertaintyEps);
    }
  }
}

}  // namespace

SideArray oracle_side_uncertainties(const Detection& det, const SceneSample& scene,
                                    double label_scale) {
  // the oracle scores a detection against the ground truth it overlaps
  // most: a detection dragged far off its source is judged against
  // whatever it landed on, which is also how evaluation will match it
  const GtBox* reference = nullptr;
  double best = -1.0;
  for (const GtBox& gt : scene.ground_truth) {
    const double iou = rotated_iou(det.box, gt.box);
    if (iou > best) {
      best = iou;
      reference = &gt;
    }
  }
  SideArray targets{};
  bool have_targets = false;
  if (reference != nullptr) {
    try {
      targets = side_targets_in_frame(det.candidate, det.box.yaw, reference->box);
      have_targets = true;
    } catch (const std::invalid_argument&) {
      // near-perpendicular frames: treat every side as fully unreliable
    }
  }
  const SideDistances own = sides_from_box(det.candidate, det.box);
  SideArray uncertainties{};
  for (int s = 0; s < kSideCount; ++s) {
    const double label =
        have_targets ? uncertainty_label(targets[s], own.distance[s], label_scale) : 1.0;
    uncertainties[s] = std::clamp(label, kUncertaintyEps, 1.0 - kUncertaintyEps);
  }
  return uncertainties;
}

void validate(const NoiseModel& noise) {
  for (int s = 0; s < kSideCount; ++s) {
    if (noise.side_std[s] < 0.0) throw std::invalid_argument("noise model: side_std must be >= 0");
    if (noise.corruption_prob[s] < 0.0 || noise.corruption_prob[s] > 1.0) {
      throw std::invalid_argument("noise model: corruption_prob must be in [0, 1]");
    }
    if (noise.corruption_magnitude[s] < 0.0) {
      throw std::invalid_argument("noise model: corruption_magnitude must be >= 0");
    }
  }
  if (noise.side_std_gain < 0.0) throw std::invalid_argument("noise model: side_std_gain must be >= 0");
  if (noise.yaw_std < 0.0) throw std::invalid_argument("noise model: yaw_std must be >= 0");
  if (noise.candidate_jitter < 0.0 || noise.candidate_jitter >= 0.5) {
    throw std::invalid_argument("noise model: candidate_jitter must be in [0, 0.5)");
  }
  if (noise.duplicate_rate < 0.0 || noise.duplicate_rate > 1.0) {
    throw std::invalid_argument("noise model: duplicate_rate must be in [0, 1]");
  }
  if (noise.spurious_rate < 0.0 || noise.spurious_rate > 1.0) {
    throw std::invalid_argument("noise model: spurious_rate must be in [0, 1]");
  }
  if (noise.sharpness_base <= 0.0) {
    throw std::invalid_argument("noise model: sharpness_base must be > 0");
  }
  if (noise.logit_noise_std < 0.0) {
    throw std::invalid_argument("noise model: logit_noise_std must be >= 0");
  }
}

std::vector<Detection> teacher_predict(const SceneSample& scene, const TeacherOptions& options,
                                       Rng& rng, std::vector<int>* source_gt) {
  validate(options.noise);
  if (options.num_classes < 1) throw std::invalid_argument("teacher options: num_classes >= 1");

  std::vector<Detection> detections;
  std::vector<int> sources;
  for (size_t g = 0; g < scene.ground_truth.size(); ++g) {
    const GtBox& gt = scene.ground_truth[g];
    detections.push_back(synthesize_detection(scene, gt, options, 1.0, rng));
    sources.push_back(static_cast<int>(g));
    if (rng.uniform() < options.noise.duplicate_rate) {
      detections.push_back(synthesize_detection(scene, gt, options, 2.5, rng));
      sources.push_back(static_cast<int>(g));
    }
    if (rng.uniform() < options.noise.spurious_rate) {
      // a box-sized phantom away from the ground truth
      GtBox phantom = gt;
      const double dx = rng.uniform(0.6, 1.6) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      const double dy = rng.uniform(0.6, 1.6) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      phantom.box.center = phantom.box.center + Vec3{dx * gt.box.size.x, dy * gt.box.size.y, 0.0};
      phantom.class_id = static_cast<int>(rng.uniform_int(options.num_classes));
      Detection det = synthesize_detection(scene, phantom, options, 3.0, rng);
      det.objectness = std::clamp(rng.uniform(0.3, 0.9), 0.0, 1.0);
      det.predicted_iou = std::clamp(rng.uniform(0.0, 0.35), 0.0, 1.0);
      detections.push_back(std::move(det));
      sources.push_back(-1);
    }
  }
  for (Detection& det : detections) fill_uncertainty(det, scene, options);
  if (source_gt != nullptr) *source_gt = std::move(sources);
  return detections;
}

}  // namespace sideaware
