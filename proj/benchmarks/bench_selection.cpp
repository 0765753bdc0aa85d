// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "sideaware/soft_pls.hpp"

namespace {

using namespace sideaware;

std::vector<Detection> crowded_detections(int count) {
  Rng rng(11);
  const SideRange range = make_range(0.0, 3.5, 32);
  std::vector<Detection> dets;
  while (static_cast<int>(dets.size()) < count) {
    const Vec3 anchor{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0.3, 1.0)};
    const Vec3 size{rng.uniform(0.5, 1.8), rng.uniform(0.5, 1.2), rng.uniform(0.5, 1.2)};
    const int members = 1 + static_cast<int>(rng.uniform_int(4));
    for (int m = 0; m < members && static_cast<int>(dets.size()) < count; ++m) {
      Detection det;
      det.box = make_box(anchor + Vec3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.0}, size,
                         rng.uniform(-3.1, 3.1));
      det.candidate = det.box.center;
      det.objectness = rng.uniform(0.7, 1.0);
      det.predicted_iou = rng.uniform();
      det.class_scores = {0.03, 0.94, 0.03};
      det.class_id = 1;
      det.side_uncertainty.fill(rng.uniform(0.05, 0.95));
      for (int s = 0; s < kSideCount; ++s) {
        det.side_dists[s] = {range, std::vector<double>(32, 1.0 / 32)};
      }
      dets.push_back(std::move(det));
    }
  }
  return dets;
}

void BM_LowHalfNms(benchmark::State& state) {
  const auto dets = crowded_detections(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou_guided_nms_low_half(dets, 0.25));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LowHalfNms)->Arg(16)->Arg(64)->Arg(256)->Complexity();

void BM_SelectPseudoLabels(benchmark::State& state) {
  const auto dets = crowded_detections(64);
  SelectionConfig config;
  // warmed counters so the adaptive thresholds sit away from their strict end
  CategoryThresholdState category_state(3);
  category_state.update(std::vector<int>{0, 0, 1, 1, 1, 1, 2});
  for (auto _ : state) {
    CategoryThresholdState local = category_state;
    benchmark::DoNotOptimize(select_pseudo_labels(dets, local, config));
  }
}
BENCHMARK(BM_SelectPseudoLabels);

}  // namespace
