// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "sideaware/geometry.hpp"

namespace {

using namespace sideaware;

std::vector<std::pair<OrientedBox3, OrientedBox3>> box_pairs(int count) {
  Rng rng(7);
  std::vector<std::pair<OrientedBox3, OrientedBox3>> pairs;
  for (int i = 0; i < count; ++i) {
    const Vec3 center{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2)};
    const Vec3 size{rng.uniform(0.3, 2), rng.uniform(0.3, 2), rng.uniform(0.3, 2)};
    const OrientedBox3 a = make_box(center, size, rng.uniform(-3.1, 3.1));
    OrientedBox3 b = a;
    b.center = b.center + Vec3{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0.1};
    b = make_box(b.center, b.size * rng.uniform(0.8, 1.2), b.yaw + rng.uniform(-0.6, 0.6));
    pairs.emplace_back(a, b);
  }
  return pairs;
}

void BM_RotatedIou(benchmark::State& state) {
  const auto pairs = box_pairs(256);
  size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 255];
    benchmark::DoNotOptimize(rotated_iou(a, b));
  }
}
BENCHMARK(BM_RotatedIou);

void BM_BevIntersection(benchmark::State& state) {
  const auto pairs = box_pairs(256);
  size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 255];
    benchmark::DoNotOptimize(bev_intersection_area(a, b));
  }
}
BENCHMARK(BM_BevIntersection);

void BM_SideRoundTrip(benchmark::State& state) {
  const auto pairs = box_pairs(256);
  size_t i = 0;
  for (auto _ : state) {
    const OrientedBox3& box = pairs[i++ & 255].first;
    const SideDistances sd = sides_from_box(box.center, box);
    benchmark::DoNotOptimize(box_from_sides(sd));
  }
}
BENCHMARK(BM_SideRoundTrip);

}  // namespace
