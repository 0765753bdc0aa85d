// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Soft pseudo-label selection: category-specific adaptive score filtering,
// IoU-guided NMS that keeps the upper half of each overlap cluster, and
// per-side quality weights derived from the estimated uncertainties.
#ifndef SIDEAWARE_SOFT_PLS_HPP_
#define SIDEAWARE_SOFT_PLS_HPP_

#include <span>
#include <vector>

#include "sideaware/distribution.hpp"
#include "sideaware/geometry.hpp"

namespace sideaware {

/// One teacher/student prediction. class_id caches the argmax of
/// class_scores; side distributions are anchored at `candidate` in the box's
/// yaw frame, and their expected values reproduce the box's side distances.
struct Detection {
  OrientedBox3 box;
  Vec3 candidate;
  std::array<SideDistribution, kSideCount> side_dists;
  std::vector<double> class_scores;
  double objectness = 0.0;
  double predicted_iou = 0.0;
  SideArray side_uncertainty{};
  int class_id = 0;
};

/// Recomputes class_id from class_scores.
void finalize_class_id(Detection& det);

/// Running per-class counters of confident predictions. The scale factor for
/// a class is its counter over the max counter, in [0, 1]; before any counts
/// arrive every class is treated as the max class (scale factor 1), so
/// adaptive thresholds start at their strict end. Counters are reset at epoch
/// boundaries by the caller. Single-writer: updates must be applied in
/// timeline order.
class CategoryThresholdState {
 public:
  CategoryThresholdState() = default;
  explicit CategoryThresholdState(int num_classes);

  void update(std::span<const int> confident_class_ids);
  void reset_counters();

  double scale_factor(int class_id) const;
  long counter(int class_id) const;
  int num_classes() const { return static_cast<int>(counters_.size()); }
  long timestamp() const { return timestamp_; }

 private:
  std::vector<long> counters_;
  long timestamp_ = 0;
};

struct ThresholdBounds {
  double tau_min = 0.0;
  double tau_max = 1.0;
};

/// tau_min + (tau_max - tau_min) * scale_factor(class_id).
double adaptive_threshold(const CategoryThresholdState& state, int class_id,
                          const ThresholdBounds& bounds);

struct SelectionConfig {
  double tau_objectness = 0.8;
  ThresholdBounds cls_bounds{0.7, 0.9};
  ThresholdBounds iou_bounds{0.15, 0.25};
  bool adaptive = true;  // false: fixed per-class IoU threshold + fixed class threshold
  double fixed_cls_threshold = 0.15;
  std::vector<double> fixed_iou_per_class;
  double nms_overlap_threshold = 0.25;
  double quality_decay = 5.0;  // q = exp(-quality_decay * u)
};

/// Keeps detections whose objectness, class score, and predicted IoU all meet
/// their thresholds (>= keeps on equality). Objectness is class-agnostic;
/// class and IoU thresholds are adaptive or fixed per the config. Preserves
/// input order; idempotent for a fixed state.
std::vector<Detection> category_filter(std::span<const Detection> detections,
                                       const CategoryThresholdState& state,
                                       const SelectionConfig& config);

/// Groups same-class detections into overlap clusters (pairwise rotated IoU
/// >= overlap_threshold, transitive closure) and keeps the top half of each
/// cluster by predicted IoU: ceil(n/2) of n, so singletons and every
/// cluster's best member always survive. Ties break by higher objectness,
/// then earlier input position. Output preserves input order.
std::vector<Detection> iou_guided_nms_low_half(std::span<const Detection> detections,
                                               double overlap_threshold);

struct QualityWeights {
  SideArray side_quality{};    // q_s = exp(-quality_decay * u_s), in (0, 1]
  double global_quality = 0.0; // arithmetic mean of the six side qualities
};

QualityWeights quality_scores(const SideArray& uncertainties, double quality_decay);

struct PseudoLabel {
  OrientedBox3 box;
  int class_id = 0;
  SideArray side_quality{};
  double global_quality = 0.0;
};

/// Full pipeline: category filter, then low-half NMS, then quality scores.
/// The state is advanced from the post-filter (pre-NMS) survivors.
std::vector<PseudoLabel> select_pseudo_labels(std::span<const Detection> detections,
                                              CategoryThresholdState& state,
                                              const SelectionConfig& config);

}  // namespace sideaware

#endif  // SIDEAWARE_SOFT_PLS_HPP_
