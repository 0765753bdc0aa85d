// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/soft_pls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sideaware {

void finalize_class_id(Detection& det) {
  if (det.class_scores.empty()) throw std::invalid_argument("detection has no class scores");
  det.class_id = static_cast<int>(
      std::max_element(det.class_scores.begin(), det.class_scores.end()) -
      det.class_scores.begin());
}

CategoryThresholdState::CategoryThresholdState(int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("need at least one class");
  counters_.assign(num_classes, 0);
}

void CategoryThresholdState::update(std::span<const int> confident_class_ids) {
  for (int c : confident_class_ids) {
    if (c < 0 || c >= num_classes()) {
      throw std::invalid_argument("class id out of range: " + std::to_string(c));
    }
    ++counters_[c];
  }
  ++timestamp_;
}

void CategoryThresholdState::reset_counters() {
  std::fill(counters_.begin(), counters_.end(), 0L);
}

long CategoryThresholdState::counter(int class_id) const {
  if (class_id < 0 || class_id >= num_classes()) {
    throw std::invalid_argument("class id out of range: " + std::to_string(class_id));
  }
  return counters_[class_id];
}

double CategoryThresholdState::scale_factor(int class_id) const {
  const long max_count = counters_.empty()
                             ? 0
                             : *std::max_element(counters_.begin(), counters_.end());
  if (max_count == 0) return 1.0;
  return static_cast<double>(counter(class_id)) / static_cast<double>(max_count);
}

double adaptive_threshold(const CategoryThresholdState& state, int class_id,
                          const ThresholdBounds& bounds) {
  if (bounds.tau_min > bounds.tau_max) {
    throw std::invalid_argument("threshold bounds require tau_min <= tau_max");
  }
  return bounds.tau_min + (bounds.tau_max - bounds.tau_min) * state.scale_factor(class_id);
}

std::vector<Detection> category_filter(std::span<const Detection> detections,
                                       const CategoryThresholdState& state,
                                       const SelectionConfig& config) {
  std::vector<Detection> kept;
  kept.reserve(detections.size());
  for (const Detection& det : detections) {
    if (det.objectness < config.tau_objectness) continue;
    const double cls_score = det.class_scores.at(det.class_id);
    double cls_threshold, iou_threshold;
    if (config.adaptive) {
      cls_threshold = adaptive_threshold(state, det.class_id, config.cls_bounds);
      iou_threshold = adaptive_threshold(state, det.class_id, config.iou_bounds);
    } else {
      cls_threshold = config.fixed_cls_threshold;
      iou_threshold = config.fixed_iou_per_class.at(det.class_id);
    }
    if (cls_score < cls_threshold) continue;
    if (det.predicted_iou < iou_threshold) continue;
    kept.push_back(det);
  }
  return kept;
}

std::vector<Detection> iou_guided_nms_low_half(std::span<const Detection> detections,
                                               double overlap_threshold) {
  if (overlap_threshold <= 0.0 || overlap_threshold >= 1.0) {
    throw std::invalid_argument("NMS overlap threshold must be in (0, 1)");
  }
  const size_t n = detections.size();

  // union-find over same-class overlap edges
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&parent](size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (detections[i].class_id != detections[j].class_id) continue;
      if (rotated_iou(detections[i].box, detections[j].box) >= overlap_threshold) {
        parent[find(i)] = find(j);
      }
    }
  }

  std::vector<std::vector<size_t>> clusters(n);
  for (size_t i = 0; i < n; ++i) clusters[find(i)].push_back(i);

  std::vector<char> keep(n, 0);
  for (std::vector<size_t>& members : clusters) {
    if (members.empty()) continue;
    std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
      if (detections[a].predicted_iou != detections[b].predicted_iou) {
        return detections[a].predicted_iou > detections[b].predicted_iou;
      }
      if (detections[a].objectness != detections[b].objectness) {
        return detections[a].objectness > detections[b].objectness;
      }
      return a < b;
    });
    const size_t keep_count = (members.size() + 1) / 2;
    for (size_t k = 0; k < keep_count; ++k) keep[members[k]] = 1;
  }

  std::vector<Detection> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(detections[i]);
  }
  return out;
}

QualityWeights quality_scores(const SideArray& uncertainties, double quality_decay) {
  if (quality_decay < 0.0) throw std::invalid_argument("quality decay must be nonnegative");
  QualityWeights q;
  double total = 0.0;
  for (int s = 0; s < kSideCount; ++s) {
    const double u = uncertainties[s];
    if (u < 0.0 || u > 1.0 || !std::isfinite(u)) {
      throw std::invalid_argument("side uncertainty must lie in [0, 1]");
    }
    q.side_quality[s] = std::exp(-quality_decay * u);
    total += q.side_quality[s];
  }
  q.global_quality = total / static_cast<double>(kSideCount);
  return q;
}

std::vector<PseudoLabel> select_pseudo_labels(std::span<const Detection> detections,
                                              CategoryThresholdState& state,
                                              const SelectionConfig& config) {
  const std::vector<Detection> filtered = category_filter(detections, state, config);

  std::vector<int> survivor_classes;
  survivor_classes.reserve(filtered.size());
  for (const Detection& det : filtered) survivor_classes.push_back(det.class_id);
  state.update(survivor_classes);

  const std::vector<Detection> kept = iou_guided_nms_low_half(filtered, config.nms_overlap_threshold);

  std::vector<PseudoLabel> labels;
  labels.reserve(kept.size());
  for (const Detection& det : kept) {
    const QualityWeights q = quality_scores(det.side_uncertainty, config.quality_decay);
    labels.push_back({det.box, det.class_id, q.side_quality, q.global_quality});
  }
  return labels;
}

}  // namespace sideaware
