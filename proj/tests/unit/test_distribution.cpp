// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "common/test_support.hpp"
#include "sideaware/distribution.hpp"

using namespace sideaware;

TEST_SUITE_BEGIN("distribution");

namespace {

SideDistribution random_distribution(const SideRange& range, Rng& rng) {
  std::vector<double> logits(range.bin_count);
  for (double& l : logits) l = rng.uniform(-3.0, 3.0);
  return distribution_from_logits(logits, range);
}

}  // namespace

TEST_CASE("distribution_from_logits: equal logits give the uniform distribution") {
  const SideRange range = make_range(0.0, 2.0, 16);
  const std::vector<double> logits(16, 0.7);
  const SideDistribution dist = distribution_from_logits(logits, range);
  for (double p : dist.probs) CHECK(p == doctest::Approx(1.0 / 16).epsilon(1e-12));
}

TEST_CASE("distribution_from_logits: one dominant logit saturates") {
  const SideRange range = make_range(0.0, 2.0, 16);
  std::vector<double> logits(16, 0.0);
  logits[5] = 20.0;
  const SideDistribution dist = distribution_from_logits(logits, range);
  CHECK(dist.probs[5] > 0.999);
}

TEST_CASE("distribution_from_logits: invariant to an additive constant") {
  const SideRange range = make_range(0.0, 3.5, 32);
  Rng rng(3);
  std::vector<double> logits(32);
  for (double& l : logits) l = rng.uniform(-2.0, 2.0);
  std::vector<double> shifted = logits;
  for (double& l : shifted) l += 7.0;
  const SideDistribution a = distribution_from_logits(logits, range);
  const SideDistribution b = distribution_from_logits(shifted, range);
  for (int i = 0; i < 32; ++i) CHECK(std::abs(a.probs[i] - b.probs[i]) < 1e-12);
}

TEST_CASE("distribution_from_logits: rejects non-finite logits and bad sizes") {
  const SideRange range = make_range(0.0, 2.0, 4);
  CHECK_THROWS_AS(distribution_from_logits(std::vector<double>{1, 2, 3}, range),
                  std::invalid_argument);
  std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0};
  CHECK_THROWS_AS(distribution_from_logits(bad, range), std::invalid_argument);
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(distribution_from_logits(bad, range), std::invalid_argument);
}

TEST_CASE("normalization holds for every constructor") {
  Rng rng(11);
  const SideRange range = make_range(0.0, 3.5, 32);
  for (int i = 0; i < 200; ++i) {
    const SideDistribution a = random_distribution(range, rng);
    const SideDistribution b = synthetic_distribution(rng.uniform(0.2, 3.0), rng.uniform(0.0, 50.0),
                                                      0.0, range, rng, 0.3);
    const SideDistribution c = shift_distribution(a, rng.uniform(-1.0, 1.0));
    for (const SideDistribution* d : {&a, &b, &c}) {
      double total = 0.0;
      for (double p : d->probs) {
        CHECK(p >= 0.0);
        total += p;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("expected_value: delta at a bin returns that bin center exactly") {
  const SideRange range = make_range(0.0, 2.0, 8);
  SideDistribution dist{range, std::vector<double>(8, 0.0)};
  dist.probs[3] = 1.0;
  CHECK(expected_value(dist) == bin_center(range, 3));
}

TEST_CASE("expected_value: uniform over [0, 2] gives 1") {
  const SideRange range = make_range(0.0, 2.0, 32);
  const SideDistribution dist{range, std::vector<double>(32, 1.0 / 32)};
  CHECK(expected_value(dist) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected_value: quarter weights on four centers give 1") {
  const SideRange range = make_range(0.0, 2.0, 4);  // centers 0.25 0.75 1.25 1.75
  CHECK(bin_center(range, 0) == doctest::Approx(0.25));
  const SideDistribution dist{range, {0.25, 0.25, 0.25, 0.25}};
  CHECK(expected_value(dist) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected_value: matches direct summation on random distributions") {
  Rng rng(21);
  const SideRange range = make_range(0.0, 3.5, 32);
  for (int i = 0; i < 500; ++i) {
    const SideDistribution dist = random_distribution(range, rng);
    double direct = 0.0;
    for (int b = 0; b < range.bin_count; ++b) direct += dist.probs[b] * bin_center(range, b);
    CHECK(std::abs(expected_value(dist) - direct) < 1e-12);
    CHECK(expected_value(dist) >= range.s_min);
    CHECK(expected_value(dist) <= range.s_max);
  }
}

TEST_CASE("expected_value is linear in the probability vector") {
  Rng rng(22);
  const SideRange range = make_range(0.0, 3.5, 32);
  for (int i = 0; i < 100; ++i) {
    const SideDistribution p = random_distribution(range, rng);
    const SideDistribution q = random_distribution(range, rng);
    const double alpha = rng.uniform();
    SideDistribution mix{range, std::vector<double>(32)};
    for (int b = 0; b < 32; ++b) mix.probs[b] = alpha * p.probs[b] + (1 - alpha) * q.probs[b];
    const double expected = alpha * expected_value(p) + (1 - alpha) * expected_value(q);
    CHECK(expected_value(mix) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("distribution_stats: delta distribution, k = 4") {
  const SideRange range = make_range(0.0, 2.0, 8);
  SideDistribution dist{range, std::vector<double>(8, 0.0)};
  dist.probs[2] = 1.0;
  const DistributionStats stats = distribution_stats(dist, 4);
  CHECK(stats.topk_mean == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(stats.full_variance == doctest::Approx(0.0));
}

TEST_CASE("distribution_stats: uniform over 32 bins") {
  const SideRange range = make_range(0.0, 3.5, 32);
  const SideDistribution dist{range, std::vector<double>(32, 1.0 / 32)};
  for (int k : {1, 4, 32}) {
    const DistributionStats stats = distribution_stats(dist, k);
    CHECK(stats.topk_mean == doctest::Approx(1.0 / 32).epsilon(1e-12));
    CHECK(stats.topk_variance == doctest::Approx(0.0));
  }
}

TEST_CASE("distribution_stats: matches a sort-and-slice oracle on 1000 random distributions") {
  Rng rng(33);
  const SideRange range = make_range(0.0, 3.5, 32);
  for (int i = 0; i < 1000; ++i) {
    const SideDistribution dist = random_distribution(range, rng);
    const int k = 1 + static_cast<int>(rng.uniform_int(32));
    const DistributionStats stats = distribution_stats(dist, k);

    std::vector<double> sorted(dist.probs);
    std::sort(sorted.rbegin(), sorted.rend());
    double mean = 0.0;
    for (int j = 0; j < k; ++j) mean += sorted[j];
    mean /= k;
    double variance = 0.0;
    for (int j = 0; j < k; ++j) variance += (sorted[j] - mean) * (sorted[j] - mean);
    variance /= k;
    CHECK(std::abs(stats.topk_mean - mean) < 1e-12);
    CHECK(std::abs(stats.topk_variance - variance) < 1e-12);

    const double ev = expected_value(dist);
    double full = 0.0;
    for (int b = 0; b < 32; ++b) {
      full += dist.probs[b] * (bin_center(range, b) - ev) * (bin_center(range, b) - ev);
    }
    CHECK(std::abs(stats.full_variance - full) < 1e-12);
  }
}

TEST_CASE("full variance is zero iff the distribution is a delta") {
  const SideRange range = make_range(0.0, 2.0, 16);
  SideDistribution delta{range, std::vector<double>(16, 0.0)};
  delta.probs[7] = 1.0;
  CHECK(distribution_stats(delta, 4).full_variance < 1e-12);

  Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    const SideDistribution dist = random_distribution(range, rng);
    const double max_prob = *std::max_element(dist.probs.begin(), dist.probs.end());
    if (max_prob < 1.0 - 1e-6) {
      CHECK(distribution_stats(dist, 4).full_variance > 1e-12);
    }
  }
}

TEST_CASE("distribution_features: dimension and consistency with the stats") {
  Rng rng(55);
  const SideRange range = make_range(0.0, 3.5, 32);
  const SideDistribution dist = random_distribution(range, rng);
  const std::vector<double> features = distribution_features(dist, 4);
  REQUIRE(features.size() == 34);
  const DistributionStats stats = distribution_stats(dist, 4);
  CHECK(features[32] == stats.topk_mean);
  CHECK(features[33] == stats.topk_variance);
  for (int i = 0; i < 32; ++i) CHECK(features[i] == dist.probs[i]);
}

TEST_CASE("synthetic_distribution: high sharpness concentrates near the target") {
  const SideRange range = make_range(0.0, 2.0, 32);
  Rng rng(66);
  const SideDistribution dist = synthetic_distribution(0.8, 1e6, 0.0, range, rng, 0.0);
  CHECK(std::abs(expected_value(dist) - 0.8) < bin_width(range));
}

TEST_CASE("synthetic_distribution: bias shifts the expectation") {
  const SideRange range = make_range(0.0, 2.0, 64);
  Rng rng(67);
  const SideDistribution base = synthetic_distribution(0.7, 5e4, 0.0, range, rng, 0.0);
  const SideDistribution biased = synthetic_distribution(0.7, 5e4, 0.3, range, rng, 0.0);
  CHECK(expected_value(biased) - expected_value(base) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("synthetic_distribution: zero sharpness gives uniform, midpoint expectation") {
  const SideRange range = make_range(0.0, 2.0, 32);
  Rng rng(68);
  const SideDistribution dist = synthetic_distribution(0.5, 0.0, 0.0, range, rng, 0.0);
  for (double p : dist.probs) CHECK(p == doctest::Approx(1.0 / 32).epsilon(1e-9));
  CHECK(expected_value(dist) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("synthetic_distribution: out-of-range target is rejected") {
  const SideRange range = make_range(0.0, 2.0, 32);
  Rng rng(69);
  CHECK_THROWS_AS(synthetic_distribution(1.9, 10.0, 0.5, range, rng, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(synthetic_distribution(-0.1, 10.0, 0.0, range, rng, 0.0), std::invalid_argument);
}

TEST_CASE("shift_distribution: interior shift moves the expectation by delta") {
  const SideRange range = make_range(0.0, 3.5, 32);
  Rng rng(70);
  for (int i = 0; i < 100; ++i) {
    const SideDistribution dist = synthetic_distribution(rng.uniform(1.0, 2.5), 200.0, 0.0, range,
                                                         rng, 0.1);
    const double delta = rng.uniform(-0.5, 0.5);
    const SideDistribution shifted = shift_distribution(dist, delta);
    CHECK(expected_value(shifted) - expected_value(dist) == doctest::Approx(delta).epsilon(1e-9));
  }
}

TEST_CASE("make_range validation") {
  CHECK_THROWS_AS(make_range(1.0, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_range(0.0, 1.0, 1), std::invalid_argument);
  const SideRange range = make_range(0.0, 3.5, 32);
  // centers strictly increasing
  for (int i = 1; i < 32; ++i) CHECK(bin_center(range, i) > bin_center(range, i - 1));
}

TEST_SUITE_END();
