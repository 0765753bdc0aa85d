// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Discretized probability distributions over a side's distance range. A side
// location is represented as a probability vector over N bin centers; its
// point estimate is the distribution's expected value.
#ifndef SIDEAWARE_DISTRIBUTION_HPP_
#define SIDEAWARE_DISTRIBUTION_HPP_

#include <span>
#include <vector>

#include "sideaware/common.hpp"
#include "sideaware/geometry.hpp"

namespace sideaware {

/// Bin layout over [s_min, s_max]. Bin values are the centers
/// s_i = s_min + (i + 0.5) * (s_max - s_min) / bin_count.
struct SideRange {
  double s_min = 0.0;
  double s_max = 1.0;
  int bin_count = 32;
};

SideRange make_range(double s_min, double s_max, int bin_count);
double bin_width(const SideRange& range);
double bin_center(const SideRange& range, int i);

/// One range per side, indexed by Side.
using SideRangeSet = std::array<SideRange, kSideCount>;

/// Indoor-style defaults: front/back/left/right over [0, 3.5] m, top/down
/// over [0, 2.0] m, 32 bins each.
SideRangeSet default_indoor_ranges();

struct SideDistribution {
  SideRange range;
  std::vector<double> probs;
};

/// Numerically stable softmax over the logits. Throws std::invalid_argument
/// on non-finite logits or a size mismatch with the range.
SideDistribution distribution_from_logits(std::span<const double> logits, const SideRange& range);

/// Expected side location: sum_i probs[i] * s_i. Always in [s_min, s_max].
double expected_value(const SideDistribution& dist);

struct DistributionStats {
  double topk_mean = 0.0;      // mean of the k largest probability values
  double topk_variance = 0.0;  // population variance of those k values
  double full_variance = 0.0;  // variance of the distribution over bin centers
};

DistributionStats distribution_stats(const SideDistribution& dist, int k);

/// Probability vector concatenated with (topk_mean, topk_variance);
/// dimension bin_count + 2.
std::vector<double> distribution_features(const SideDistribution& dist, int k);

/// Builds a peaked distribution around true_value + bias:
/// softmax(-(s_i - target)^2 * sharpness + noise), noise ~ N(0, logit_noise_std).
/// Throws std::invalid_argument if the target falls outside the range.
SideDistribution synthetic_distribution(double true_value, double sharpness, double bias,
                                        const SideRange& range, Rng& rng,
                                        double logit_noise_std = 0.0);

/// Translates the distribution by delta along the side axis, redistributing
/// each bin's mass linearly between the two straddling bins. Mass pushed past
/// a range end piles up in the boundary bin, so the expectation shifts by
/// exactly delta only while everything stays interior.
SideDistribution shift_distribution(const SideDistribution& dist, double delta);

}  // namespace sideaware

#endif  // SIDEAWARE_DISTRIBUTION_HPP_
