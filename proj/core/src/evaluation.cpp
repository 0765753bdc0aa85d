// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace sideaware {

MatchResult match_detections(std::span<const EvalPrediction> preds, std::span<const GtBox> gts,
                             double iou_threshold) {
  MatchResult result;
  result.pred_to_gt.assign(preds.size(), -1);
  result.gt_matched.assign(gts.size(), 0);

  std::vector<size_t> order(preds.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return preds[a].score > preds[b].score; });

  for (size_t p : order) {
    double best_iou = 0.0;
    int best_gt = -1;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (result.gt_matched[g] || gts[g].class_id != preds[p].class_id) continue;
      const double iou = rotated_iou(preds[p].box, gts[g].box);
      if (iou >= iou_threshold && iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      result.pred_to_gt[p] = best_gt;
      result.gt_matched[best_gt] = 1;
    }
  }
  return result;
}

ApResult average_precision(std::span<const ScenePredictions> preds,
                           std::span<const SceneGroundTruth> gts,
                           std::span<const double> iou_thresholds, int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("average_precision: num_classes >= 1");

  std::map<int, const SceneGroundTruth*> gt_by_scene;
  for (const SceneGroundTruth& g : gts) gt_by_scene[g.scene_id] = &g;

  std::vector<long> gt_per_class(num_classes, 0);
  for (const SceneGroundTruth& g : gts) {
    for (const GtBox& box : g.boxes) gt_per_class.at(box.class_id)++;
  }

  struct FlatPred {
    double score;
    int scene_id;
    int class_id;
    const EvalPrediction* pred;
  };
  std::vector<FlatPred> flat;
  for (const ScenePredictions& sp : preds) {
    for (const EvalPrediction& p : sp.preds) {
      if (p.class_id < 0 || p.class_id >= num_classes) {
        throw std::invalid_argument("average_precision: prediction class id out of range");
      }
      flat.push_back({p.score, sp.scene_id, p.class_id, &p});
    }
  }
  std::stable_sort(flat.begin(), flat.end(), [](const FlatPred& a, const FlatPred& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.scene_id < b.scene_id;
  });

  ApResult result;
  result.iou_thresholds.assign(iou_thresholds.begin(), iou_thresholds.end());
  result.per_class_ap.assign(iou_thresholds.size(),
                             std::vector<double>(num_classes, std::numeric_limits<double>::quiet_NaN()));
  result.mean_ap.assign(iou_thresholds.size(), 0.0);

  for (size_t t = 0; t < iou_thresholds.size(); ++t) {
    const double threshold = iou_thresholds[t];
    // greedy sweep in global score order; each gt claimable once
    std::map<int, std::vector<char>> claimed;
    for (const SceneGroundTruth& g : gts) claimed[g.scene_id].assign(g.boxes.size(), 0);

    std::vector<std::vector<char>> tp_flags(num_classes);
    for (const FlatPred& fp : flat) {
      bool tp = false;
      auto it = gt_by_scene.find(fp.scene_id);
      if (it != gt_by_scene.end()) {
        const std::vector<GtBox>& boxes = it->second->boxes;
        std::vector<char>& used = claimed[fp.scene_id];
        double best_iou = 0.0;
        int best_g = -1;
        for (size_t g = 0; g < boxes.size(); ++g) {
          if (used[g] || boxes[g].class_id != fp.class_id) continue;
          const double iou = rotated_iou(fp.pred->box, boxes[g].box);
          if (iou >= threshold && iou > best_iou) {
            best_iou = iou;
            best_g = static_cast<int>(g);
          }
        }
        if (best_g >= 0) {
          used[best_g] = 1;
          tp = true;
        }
      }
      tp_flags[fp.class_id].push_back(tp ? 1 : 0);
    }

    double ap_sum = 0.0;
    int classes_with_gt = 0;
    for (int c = 0; c < num_classes; ++c) {
      if (gt_per_class[c] == 0) continue;
      ++classes_with_gt;
      const std::vector<char>& flags = tp_flags[c];
      std::vector<double> precision(flags.size());
      std::vector<double> recall(flags.size());
      long tp_count = 0;
      for (size_t i = 0; i < flags.size(); ++i) {
        if (flags[i]) ++tp_count;
        precision[i] = static_cast<double>(tp_count) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp_count) / static_cast<double>(gt_per_class[c]);
      }
      // precision envelope from the right, then area under the steps
      for (size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
      }
      double ap = 0.0;
      double prev_recall = 0.0;
      for (size_t i = 0; i < flags.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
      }
      result.per_class_ap[t][c] = ap;
      ap_sum += ap;
    }
    result.mean_ap[t] = classes_with_gt > 0 ? ap_sum / classes_with_gt : 0.0;
  }
  return result;
}

SideQualityReport side_error_stats(std::span<const ScenePseudoLabels> pseudo_labels,
                                   std::span<const SceneGroundTruth> gts,
                                   double iou_match_threshold, double side_error_threshold,
                                   int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("side_error_stats: num_classes >= 1");
  SideQualityReport report;
  report.per_class.assign(num_classes, {});

  std::map<int, const ScenePseudoLabels*> pl_by_scene;
  for (const ScenePseudoLabels& p : pseudo_labels) pl_by_scene[p.scene_id] = &p;

  double weighted_error_sum = 0.0;
  double weight_sum = 0.0;
  double error_sum = 0.0;
  long side_count = 0;

  for (const SceneGroundTruth& scene_gt : gts) {
    report.total_gt += static_cast<long>(scene_gt.boxes.size());
    auto it = pl_by_scene.find(scene_gt.scene_id);
    if (it == pl_by_scene.end()) continue;
    const std::vector<PseudoLabel>& labels = it->second->labels;

    std::vector<EvalPrediction> preds;
    preds.reserve(labels.size());
    for (const PseudoLabel& pl : labels) {
      preds.push_back({pl.box, pl.class_id, pl.global_quality});
    }
    const MatchResult matches = match_detections(preds, scene_gt.boxes, iou_match_threshold);

    for (size_t p = 0; p < labels.size(); ++p) {
      const int g = matches.pred_to_gt[p];
      if (g < 0) continue;
      ++report.matched_pseudo_labels;
      const PseudoLabel& pl = labels[p];
      ClassSideStats& cls = report.per_class.at(pl.class_id);
      ++cls.matches;
      const OrientedBox3& gt_box = scene_gt.boxes[g].box;
      for (Side side : kAllSides) {
        const int s = side_index(side);
        const Vec3 n = face_normal(gt_box, side);
        const double error = std::abs(dot(n, face_center(pl.box, side) - face_center(gt_box, side)));
        if (error < side_error_threshold) {
          ++report.good_side_count;
          ++cls.good_sides;
        } else {
          ++report.bad_side_count;
          ++cls.bad_sides;
        }
        weighted_error_sum += pl.side_quality[s] * error;
        weight_sum += pl.side_quality[s];
        error_sum += error;
        ++side_count;
      }
    }
    for (char matched : matches.gt_matched) {
      if (matched) ++report.matched_gt;
    }
  }

  report.recall = report.total_gt > 0
                      ? static_cast<double>(report.matched_gt) / static_cast<double>(report.total_gt)
                      : 0.0;
  report.weighted_mean_side_error = weight_sum > 0.0 ? weighted_error_sum / weight_sum : 0.0;
  report.unweighted_mean_side_error =
      side_count > 0 ? error_sum / static_cast<double>(side_count) : 0.0;
  return report;
}

}  // namespace sideaware
