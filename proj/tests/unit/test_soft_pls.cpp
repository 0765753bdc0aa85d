// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "common/test_support.hpp"
#include "sideaware/soft_pls.hpp"

using namespace sideaware;
using test::nms_low_half_oracle;
using test::random_box;

TEST_SUITE_BEGIN("soft_pls");

namespace {

Detection make_detection(const OrientedBox3& box, int class_id, double cls_score,
                         double objectness, double predicted_iou, int num_classes = 3) {
  Detection det;
  det.box = box;
  det.candidate = box.center;
  det.objectness = objectness;
  det.predicted_iou = predicted_iou;
  det.class_scores.assign(num_classes, (1.0 - cls_score) / (num_classes - 1));
  det.class_scores[class_id] = cls_score;
  det.side_uncertainty.fill(0.2);
  finalize_class_id(det);
  const SideRange range = make_range(0.0, 3.5, 32);
  for (int s = 0; s < kSideCount; ++s) {
    det.side_dists[s].range = range;
    det.side_dists[s].probs.assign(32, 1.0 / 32);
  }
  return det;
}

std::vector<Detection> random_scene_detections(Rng& rng, int count) {
  std::vector<Detection> dets;
  for (int i = 0; i < count; ++i) {
    // cluster detections around a few anchor boxes so overlaps actually occur
    const OrientedBox3 anchor = random_box(rng);
    const int group = 1 + static_cast<int>(rng.uniform_int(3));
    for (int g = 0; g < group && static_cast<int>(dets.size()) < count; ++g) {
      OrientedBox3 box = anchor;
      box.center = box.center + Vec3{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0};
      box = make_box(box.center, box.size, box.yaw + rng.uniform(-0.2, 0.2));
      dets.push_back(make_detection(box, static_cast<int>(rng.uniform_int(3)),
                                    rng.uniform(0.4, 1.0), rng.uniform(0.5, 1.0), rng.uniform()));
    }
  }
  return dets;
}

}  // namespace

TEST_CASE("category state: empty update only advances the timestamp") {
  CategoryThresholdState state(3);
  const long t0 = state.timestamp();
  state.update({});
  CHECK(state.timestamp() == t0 + 1);
  for (int c = 0; c < 3; ++c) CHECK(state.counter(c) == 0);
}

TEST_CASE("category state: a single dominant class scales the others") {
  CategoryThresholdState state(3);
  const std::vector<int> batch{0, 0, 0, 0, 1};
  state.update(batch);
  CHECK(state.scale_factor(0) == doctest::Approx(1.0));
  CHECK(state.scale_factor(1) == doctest::Approx(0.25));
  CHECK(state.scale_factor(2) == doctest::Approx(0.0));
}

TEST_CASE("category state: counters equal a brute-force tally over batches") {
  Rng rng(71);
  CategoryThresholdState state(4);
  std::vector<int> all;
  for (int batch = 0; batch < 3; ++batch) {
    std::vector<int> ids;
    const int n = static_cast<int>(rng.uniform_int(30));
    for (int i = 0; i < n; ++i) ids.push_back(static_cast<int>(rng.uniform_int(4)));
    state.update(ids);
    all.insert(all.end(), ids.begin(), ids.end());
  }
  for (int c = 0; c < 4; ++c) {
    long tally = 0;
    for (int id : all) {
      if (id == c) ++tally;
    }
    CHECK(state.counter(c) == tally);
  }
  CHECK(state.timestamp() == 3);
  state.reset_counters();
  for (int c = 0; c < 4; ++c) CHECK(state.counter(c) == 0);
}

TEST_CASE("category state: all-zero counters treat every class as the max") {
  CategoryThresholdState state(3);
  for (int c = 0; c < 3; ++c) CHECK(state.scale_factor(c) == 1.0);
}

TEST_CASE("adaptive_threshold: endpoints and pinned interior values") {
  CategoryThresholdState state(2);
  state.update(std::vector<int>{0, 0, 1});  // gamma(0) = 1, gamma(1) = 1/3

  CHECK(adaptive_threshold(state, 0, {0.7, 0.9}) == doctest::Approx(0.9).epsilon(1e-12));

  CategoryThresholdState half(2);
  half.update(std::vector<int>{0, 0, 1});  // gamma(1) = 0.5
  CHECK(half.scale_factor(1) == doctest::Approx(0.5));
  CHECK(adaptive_threshold(half, 1, {0.7, 0.9}) == doctest::Approx(0.8).epsilon(1e-12));

  CategoryThresholdState two_fifths(2);
  two_fifths.update(std::vector<int>{0, 0, 0, 0, 0, 1, 1});  // gamma(1) = 0.4
  CHECK(adaptive_threshold(two_fifths, 1, {0.15, 0.25}) == doctest::Approx(0.19).epsilon(1e-12));

  CategoryThresholdState zero(2);
  zero.update(std::vector<int>{0});  // gamma(1) = 0
  CHECK(adaptive_threshold(zero, 1, {0.7, 0.9}) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("adaptive_threshold: stays within bounds for any history") {
  Rng rng(72);
  CategoryThresholdState state(5);
  for (int step = 0; step < 50; ++step) {
    std::vector<int> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(static_cast<int>(rng.uniform_int(5)));
    state.update(ids);
    for (int c = 0; c < 5; ++c) {
      const double tau = adaptive_threshold(state, c, {0.15, 0.25});
      CHECK(tau >= 0.15);
      CHECK(tau <= 0.25);
    }
  }
}

TEST_CASE("category_filter: everything kept at perfect scores") {
  CategoryThresholdState state(3);
  SelectionConfig config;
  std::vector<Detection> dets;
  for (int i = 0; i < 5; ++i) {
    dets.push_back(make_detection(make_box({i * 3.0, 0, 0}, {1, 1, 1}, 0.1), i % 3, 1.0, 1.0, 1.0));
  }
  CHECK(category_filter(dets, state, config).size() == dets.size());
}

TEST_CASE("category_filter: objectness 0.79 against gate 0.8 is dropped") {
  CategoryThresholdState state(3);
  SelectionConfig config;  // tau_objectness = 0.8
  std::vector<Detection> dets{
      make_detection(make_box({0, 0, 0}, {1, 1, 1}, 0), 0, 1.0, 0.79, 1.0),
      make_detection(make_box({3, 0, 0}, {1, 1, 1}, 0), 0, 1.0, 0.80, 1.0),
  };
  const auto kept = category_filter(dets, state, config);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].objectness == 0.80);
}

TEST_CASE("category_filter: matches a brute-force predicate scan exactly") {
  Rng rng(73);
  for (int trial = 0; trial < 50; ++trial) {
    CategoryThresholdState state(3);
    std::vector<int> warmup;
    for (int i = 0; i < 20; ++i) warmup.push_back(static_cast<int>(rng.uniform_int(3)));
    state.update(warmup);

    SelectionConfig config;
    const std::vector<Detection> dets = random_scene_detections(rng, 20);
    const auto kept = category_filter(dets, state, config);

    std::vector<const Detection*> expected;
    for (const Detection& det : dets) {
      const double tau_cls = 0.7 + 0.2 * state.scale_factor(det.class_id);
      const double tau_iou = 0.15 + 0.1 * state.scale_factor(det.class_id);
      if (det.objectness >= 0.8 && det.class_scores[det.class_id] >= tau_cls &&
          det.predicted_iou >= tau_iou) {
        expected.push_back(&det);
      }
    }
    REQUIRE(kept.size() == expected.size());
    for (size_t i = 0; i < kept.size(); ++i) {
      CHECK(kept[i].objectness == expected[i]->objectness);
      CHECK(kept[i].predicted_iou == expected[i]->predicted_iou);
    }
  }
}

TEST_CASE("category_filter: idempotent for a fixed state") {
  Rng rng(74);
  CategoryThresholdState state(3);
  state.update(std::vector<int>{0, 1, 1, 2});
  SelectionConfig config;
  const std::vector<Detection> dets = random_scene_detections(rng, 30);
  const auto once = category_filter(dets, state, config);
  const auto twice = category_filter(once, state, config);
  REQUIRE(once.size() == twice.size());
  for (size_t i = 0; i < once.size(); ++i) CHECK(once[i].objectness == twice[i].objectness);
}

TEST_CASE("category_filter: fixed per-class threshold mode") {
  CategoryThresholdState state(3);
  SelectionConfig config;
  config.adaptive = false;
  config.fixed_cls_threshold = 0.15;
  config.fixed_iou_per_class = {0.7, 0.3, 0.5};
  std::vector<Detection> dets{
      make_detection(make_box({0, 0, 0}, {1, 1, 1}, 0), 0, 0.9, 0.9, 0.65),  // below class-0 gate
      make_detection(make_box({3, 0, 0}, {1, 1, 1}, 0), 1, 0.9, 0.9, 0.35),  // above class-1 gate
  };
  const auto kept = category_filter(dets, state, config);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].class_id == 1);
}

TEST_CASE("nms low half: two disjoint detections are both kept") {
  std::vector<Detection> dets{
      make_detection(make_box({0, 0, 0}, {1, 1, 1}, 0), 0, 1.0, 1.0, 0.9),
      make_detection(make_box({5, 0, 0}, {1, 1, 1}, 0), 0, 1.0, 1.0, 0.2),
  };
  CHECK(iou_guided_nms_low_half(dets, 0.25).size() == 2);
}

TEST_CASE("nms low half: a 4-cluster keeps exactly the top 2 by predicted IoU") {
  std::vector<Detection> dets;
  const OrientedBox3 base = make_box({0, 0, 0}, {2, 2, 1}, 0.0);
  const double ious[4] = {0.3, 0.9, 0.6, 0.7};
  for (double piou : ious) {
    OrientedBox3 box = base;
    box.center.x += 0.05 * piou;  // near-identical footprints, all overlapping
    dets.push_back(make_detection(box, 1, 1.0, 1.0, piou));
  }
  const auto kept = iou_guided_nms_low_half(dets, 0.25);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].predicted_iou == 0.9);
  CHECK(kept[1].predicted_iou == 0.7);
}

TEST_CASE("nms low half: different classes never suppress each other") {
  std::vector<Detection> dets{
      make_detection(make_box({0, 0, 0}, {1, 1, 1}, 0), 0, 1.0, 1.0, 0.9),
      make_detection(make_box({0, 0, 0}, {1, 1, 1}, 0), 1, 1.0, 1.0, 0.1),
  };
  CHECK(iou_guided_nms_low_half(dets, 0.25).size() == 2);
}

TEST_CASE("nms low half: matches the brute-force cluster oracle on 200 random scenes") {
  Rng rng(75);
  for (int scene = 0; scene < 200; ++scene) {
    const std::vector<Detection> dets = random_scene_detections(rng, 4 + static_cast<int>(rng.uniform_int(14)));
    const double threshold = rng.uniform(0.15, 0.6);
    const auto kept = iou_guided_nms_low_half(dets, threshold);
    const std::vector<size_t> expected = nms_low_half_oracle(dets, threshold);
    REQUIRE(kept.size() == expected.size());
    for (size_t i = 0; i < kept.size(); ++i) {
      CHECK(kept[i].predicted_iou == dets[expected[i]].predicted_iou);
      CHECK(kept[i].objectness == dets[expected[i]].objectness);
    }
  }
}

TEST_CASE("nms low half: the cluster argmax always survives") {
  Rng rng(76);
  for (int scene = 0; scene < 50; ++scene) {
    const std::vector<Detection> dets = random_scene_detections(rng, 12);
    const auto kept = iou_guided_nms_low_half(dets, 0.25);
    // the global argmax of predicted IoU is in some cluster's top half
    double best = -1.0;
    for (const Detection& det : dets) best = std::max(best, det.predicted_iou);
    bool found = false;
    for (const Detection& det : kept) {
      if (det.predicted_iou == best) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("quality_scores: zero uncertainty gives quality 1") {
  SideArray u{};
  const QualityWeights q = quality_scores(u, 5.0);
  for (int s = 0; s < kSideCount; ++s) CHECK(q.side_quality[s] == doctest::Approx(1.0));
  CHECK(q.global_quality == doctest::Approx(1.0));
}

TEST_CASE("quality_scores: decay 5 at u = 0.2 gives 1/e") {
  SideArray u{};
  u.fill(0.2);
  const QualityWeights q = quality_scores(u, 5.0);
  for (int s = 0; s < kSideCount; ++s) {
    CHECK(q.side_quality[s] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  CHECK(q.global_quality == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("quality_scores: strictly decreasing in u, bounded in (exp(-decay), 1]") {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    const double decay = rng.uniform(0.5, 8.0);
    const double u1 = rng.uniform(0.0, 0.99);
    const double u2 = u1 + rng.uniform(0.001, 1.0 - u1);
    SideArray a{}, b{};
    a.fill(u1);
    b.fill(u2);
    const QualityWeights qa = quality_scores(a, decay);
    const QualityWeights qb = quality_scores(b, decay);
    CHECK(qa.side_quality[0] > qb.side_quality[0]);
    CHECK(qa.side_quality[0] <= 1.0);
    CHECK(qb.side_quality[0] >= std::exp(-decay));
  }
}

TEST_CASE("select_pseudo_labels: empty input gives empty output") {
  CategoryThresholdState state(3);
  SelectionConfig config;
  CHECK(select_pseudo_labels({}, state, config).empty());
  CHECK(state.timestamp() == 1);
}

TEST_CASE("select_pseudo_labels: one confident detection passes with its quality intact") {
  CategoryThresholdState state(3);
  SelectionConfig config;
  Detection det = make_detection(make_box({0, 0, 0}, {1, 1, 1}, 0.2), 1, 0.95, 0.9, 0.95);
  det.side_uncertainty = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const auto labels = select_pseudo_labels(std::vector<Detection>{det}, state, config);
  REQUIRE(labels.size() == 1);
  double sum = 0.0;
  for (int s = 0; s < kSideCount; ++s) {
    const double expected = std::exp(-5.0 * det.side_uncertainty[s]);
    CHECK(labels[0].side_quality[s] == doctest::Approx(expected).epsilon(1e-12));
    sum += labels[0].side_quality[s];
  }
  CHECK(labels[0].global_quality == doctest::Approx(sum / 6.0).epsilon(1e-12));
  CHECK(state.counter(1) == 1);
}

TEST_CASE("select_pseudo_labels: equals the composition of the three stages") {
  Rng rng(78);
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<Detection> dets = random_scene_detections(rng, 16);
    SelectionConfig config;
    config.nms_overlap_threshold = 0.3;

    CategoryThresholdState pipeline_state(3);
    pipeline_state.update(std::vector<int>{0, 1, 2});
    CategoryThresholdState oracle_state(3);
    oracle_state.update(std::vector<int>{0, 1, 2});

    const auto labels = select_pseudo_labels(dets, pipeline_state, config);

    const auto filtered = category_filter(dets, oracle_state, config);
    std::vector<int> survivors;
    for (const Detection& det : filtered) survivors.push_back(det.class_id);
    oracle_state.update(survivors);
    const auto kept = iou_guided_nms_low_half(filtered, config.nms_overlap_threshold);

    REQUIRE(labels.size() == kept.size());
    for (size_t i = 0; i < kept.size(); ++i) {
      const QualityWeights q = quality_scores(kept[i].side_uncertainty, config.quality_decay);
      CHECK(labels[i].class_id == kept[i].class_id);
      CHECK(labels[i].global_quality == doctest::Approx(q.global_quality).epsilon(1e-12));
    }
    for (int c = 0; c < 3; ++c) CHECK(pipeline_state.counter(c) == oracle_state.counter(c));

    // filters never add
    CHECK(labels.size() <= dets.size());
    CHECK(kept.size() <= filtered.size());
  }
}

TEST_SUITE_END();
