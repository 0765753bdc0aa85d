// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regression losses: per-side smooth L1, the combined box loss (rotated-IoU
// term plus six side terms, optionally weighted by per-side quality), and the
// total objective combining supervised and unsupervised parts.
#ifndef SIDEAWARE_LOSSES_HPP_
#define SIDEAWARE_LOSSES_HPP_

#include "sideaware/geometry.hpp"
#include "sideaware/soft_pls.hpp"

namespace sideaware {

struct LossConfig {
  double smooth_l1_delta = 1.0;  // quadratic-to-linear transition (meters)
  double beta = 1.0;             // unsupervised loss weight
  double sampling_ratio = 1.0;   // labeled : unlabeled scenes per iteration
};

/// Validates invariants (delta > 0, beta >= 0, ratio > 0); throws
/// std::invalid_argument naming the offending field.
void validate(const LossConfig& config);

/// 0.5 x^2 / delta for |x| < delta, |x| - 0.5 delta otherwise, x = pred - target.
double smooth_l1(double pred, double target, double delta);

/// d smooth_l1 / d pred. At |x| == delta the linear-branch value is returned.
double smooth_l1_grad(double pred, double target, double delta);

struct BoxLossBreakdown {
  double iou_term = 0.0;       // (1 - rotated IoU), weighted by global quality if given
  SideArray side_terms{};      // per-side smooth L1, weighted by side quality if given
  double total = 0.0;
};

/// Box loss of a side-parameterized prediction against a target box. The
/// per-side regression targets are the target box's face distances measured
/// from the prediction's candidate point along the prediction's yaw frame
/// axes. With weights, the IoU term scales by the global quality and each
/// side term by its side quality; without, all weights are 1.
BoxLossBreakdown box_loss(const SideArray& pred_sides, const OrientedBox3& pred_box,
                          const Vec3& candidate, const OrientedBox3& target_box,
                          double smooth_l1_delta, const QualityWeights* weights = nullptr);

/// supervised + beta * unsupervised.
double total_ssl_loss(double supervised, double unsupervised, double beta);

}  // namespace sideaware

#endif  // SIDEAWARE_LOSSES_HPP_
