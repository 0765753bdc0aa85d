// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Detection evaluation: greedy score-ordered matching, average precision
// with all-point interpolation, and per-side error statistics for accepted
// pseudo-labels.
#ifndef SIDEAWARE_EVALUATION_HPP_
#define SIDEAWARE_EVALUATION_HPP_

#include <span>
#include <vector>

#include "sideaware/scene.hpp"
#include "sideaware/soft_pls.hpp"

namespace sideaware {

struct EvalPrediction {
  OrientedBox3 box;
  int class_id = 0;
  double score = 0.0;
};

struct MatchResult {
  std::vector<int> pred_to_gt;    // per prediction: matched gt index or -1
  std::vector<char> gt_matched;   // per ground truth: claimed flag
};

/// Greedy matching: predictions in descending score order each claim their
/// highest-IoU unmatched same-class ground truth, if that IoU reaches the
/// threshold. Score ties break by input position, so the result is
/// deterministic.
MatchResult match_detections(std::span<const EvalPrediction> preds, std::span<const GtBox> gts,
                             double iou_threshold);

struct ScenePredictions {
  int scene_id = 0;
  std::vector<EvalPrediction> preds;
};

struct SceneGroundTruth {
  int scene_id = 0;
  std::vector<GtBox> boxes;
};

struct ApResult {
  std::vector<double> iou_thresholds;
  std::vector<std::vector<double>> per_class_ap;  // [threshold][class]; NaN if class has no gt
  std::vector<double> mean_ap;                    // [threshold], over classes with >= 1 gt
};

/// Precision/recall from globally score-sorted predictions, area under the
/// precision envelope (all-point interpolation). Classes without ground
/// truth are excluded from the mean.
ApResult average_precision(std::span<const ScenePredictions> preds,
                           std::span<const SceneGroundTruth> gts,
                           std::span<const double> iou_thresholds, int num_classes);

struct ScenePseudoLabels {
  int scene_id = 0;
  std::vector<PseudoLabel> labels;
};

struct ClassSideStats {
  long good_sides = 0;
  long bad_sides = 0;
  long matches = 0;
};

struct SideQualityReport {
  long good_side_count = 0;     // side error below the threshold
  long bad_side_count = 0;
  long matched_pseudo_labels = 0;
  long matched_gt = 0;
  long total_gt = 0;
  double recall = 0.0;          // matched gt / total gt
  double weighted_mean_side_error = 0.0;    // weights = per-side quality
  double unweighted_mean_side_error = 0.0;
  std::vector<ClassSideStats> per_class;
};

/// Pseudo-labels are matched per scene (greedy by global quality, same class,
/// rotated IoU >= iou_match_threshold). The side error of a matched pair is
/// the distance between corresponding face centers measured along the ground
/// truth's face normal, so yaw mismatch shows up as side error.
SideQualityReport side_error_stats(std::span<const ScenePseudoLabels> pseudo_labels,
                                   std::span<const SceneGroundTruth> gts,
                                   double iou_match_threshold, double side_error_threshold,
                                   int num_classes);

}  // namespace sideaware

#endif  // SIDEAWARE_EVALUATION_HPP_
