// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "sideaware/scene.hpp"
#include "sideaware/teacher.hpp"
#include "sideaware/uncertainty.hpp"

namespace {

using namespace sideaware;

void BM_GenerateScene(benchmark::State& state) {
  const SceneConfig config = default_scene_config();
  uint64_t i = 0;
  for (auto _ : state) {
    Rng rng(i++);
    benchmark::DoNotOptimize(generate_scene(config, 0, true, rng));
  }
}
BENCHMARK(BM_GenerateScene);

void BM_TeacherPredict(benchmark::State& state) {
  const SceneConfig config = default_scene_config();
  Rng scene_rng(3);
  const SceneSample scene = generate_scene(config, 0, true, scene_rng);
  TeacherOptions options;
  options.noise.corruption_prob.fill(0.3);
  uint64_t i = 0;
  for (auto _ : state) {
    Rng rng(i++);
    benchmark::DoNotOptimize(teacher_predict(scene, options, rng));
  }
}
BENCHMARK(BM_TeacherPredict);

void BM_TrainStep(benchmark::State& state) {
  Rng rng(5);
  const ModelShape shape{kSeedFeatureDim + 3, 32, 34, 64};
  UncertaintyModel model = UncertaintyModel::random_init(shape, rng);
  std::vector<UncertaintyTrainingSample> batch;
  for (int i = 0; i < 128; ++i) {
    UncertaintyTrainingSample sample;
    sample.geo_features.resize(shape.point_dim);
    sample.dist_features.resize(shape.dist_dim);
    for (double& v : sample.geo_features) v = rng.uniform(-1, 1);
    for (double& v : sample.dist_features) v = rng.uniform(0, 1);
    sample.label = rng.uniform();
    batch.push_back(std::move(sample));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_step(model, batch, 1e-6));
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace
