// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace sideaware {

void validate(const LossConfig& config) {
  if (!(config.smooth_l1_delta > 0.0)) {
    throw std::invalid_argument("loss config: smooth_l1_delta must be > 0");
  }
  if (!(config.beta >= 0.0)) {
    throw std::invalid_argument("loss config: beta must be >= 0");
  }
  if (!(config.sampling_ratio > 0.0)) {
    throw std::invalid_argument("loss config: sampling_ratio must be > 0");
  }
}

double smooth_l1(double pred, double target, double delta) {
  if (!std::isfinite(pred) || !std::isfinite(target)) {
    throw std::invalid_argument("smooth_l1 inputs must be finite");
  }
  if (delta <= 0.0) throw std::invalid_argument("smooth_l1 delta must be positive");
  const double x = std::abs(pred - target);
  if (x < delta) return 0.5 * x * x / delta;
  return x - 0.5 * delta;
}

double smooth_l1_grad(double pred, double target, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("smooth_l1 delta must be positive");
  const double x = pred - target;
  if (std::abs(x) < delta) return x / delta;
  return x > 0.0 ? 1.0 : -1.0;
}

BoxLossBreakdown box_loss(const SideArray& pred_sides, const OrientedBox3& pred_box,
                          const Vec3& candidate, const OrientedBox3& target_box,
                          double smooth_l1_delta, const QualityWeights* weights) {
  const SideArray targets = side_targets_in_frame(candidate, pred_box.yaw, target_box);
  BoxLossBreakdown out;
  const double iou = rotated_iou(pred_box, target_box);
  const double global_w = weights ? weights->global_quality : 1.0;
  out.iou_term = global_w * (1.0 - iou);
  out.total = out.iou_term;
  for (int s = 0; s < kSideCount; ++s) {
    const double side_w = weights ? weights->side_quality[s] : 1.0;
    out.side_terms[s] = side_w * smooth_l1(pred_sides[s], targets[s], smooth_l1_delta);
    out.total += out.side_terms[s];
  }
  return out;
}

double total_ssl_loss(double supervised, double unsupervised, double beta) {
  if (!std::isfinite(supervised) || !std::isfinite(unsupervised) || !std::isfinite(beta)) {
    throw std::invalid_argument("loss terms must be finite");
  }
  return supervised + beta * unsupervised;
}

}  // namespace sideaware
