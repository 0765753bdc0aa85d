// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/distribution.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace sideaware {

SideRange make_range(double s_min, double s_max, int bin_count) {
  if (!std::isfinite(s_min) || !std::isfinite(s_max) || s_min >= s_max) {
    throw std::invalid_argument("side range requires finite s_min < s_max");
  }
  if (bin_count < 2) {
    throw std::invalid_argument("side range requires at least 2 bins");
  }
  return {s_min, s_max, bin_count};
}

double bin_width(const SideRange& range) {
  return (range.s_max - range.s_min) / static_cast<double>(range.bin_count);
}

double bin_center(const SideRange& range, int i) {
  return range.s_min + (static_cast<double>(i) + 0.5) * bin_width(range);
}

SideRangeSet default_indoor_ranges() {
  SideRangeSet ranges;
  const SideRange horizontal = make_range(0.0, 3.5, 32);
  const SideRange vertical = make_range(0.0, 2.0, 32);
  ranges[side_index(Side::kFront)] = horizontal;
  ranges[side_index(Side::kBack)] = horizontal;
  ranges[side_index(Side::kLeft)] = horizontal;
  ranges[side_index(Side::kRight)] = horizontal;
  ranges[side_index(Side::kTop)] = vertical;
  ranges[side_index(Side::kDown)] = vertical;
  return ranges;
}

SideDistribution distribution_from_logits(std::span<const double> logits, const SideRange& range) {
  if (static_cast<int>(logits.size()) != range.bin_count) {
    throw std::invalid_argument("logit count does not match range bin count");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double l : logits) {
    if (!std::isfinite(l)) throw std::invalid_argument("logits must be finite");
    max_logit = std::max(max_logit, l);
  }
  SideDistribution dist{range, std::vector<double>(logits.size())};
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    dist.probs[i] = std::exp(logits[i] - max_logit);
    total += dist.probs[i];
  }
  for (double& p : dist.probs) p /= total;
  return dist;
}

double expected_value(const SideDistribution& dist) {
  double e = 0.0;
  for (size_t i = 0; i < dist.probs.size(); ++i) {
    e += dist.probs[i] * bin_center(dist.range, static_cast<int>(i));
  }
  return e;
}

DistributionStats distribution_stats(const SideDistribution& dist, int k) {
  const int n = static_cast<int>(dist.probs.size());
  if (k < 1 || k > n) {
    throw std::invalid_argument("top-k parameter must be in [1, bin_count], got " + std::to_string(k));
  }
  std::vector<double> sorted(dist.probs);
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(), std::greater<double>());

  DistributionStats stats;
  for (int i = 0; i < k; ++i) stats.topk_mean += sorted[i];
  stats.topk_mean /= static_cast<double>(k);
  for (int i = 0; i < k; ++i) {
    const double d = sorted[i] - stats.topk_mean;
    stats.topk_variance += d * d;
  }
  stats.topk_variance /= static_cast<double>(k);

  const double mean = expected_value(dist);
  for (int i = 0; i < n; ++i) {
    const double d = bin_center(dist.range, i) - mean;
    stats.full_variance += dist.probs[i] * d * d;
  }
  return stats;
}

std::vector<double> distribution_features(const SideDistribution& dist, int k) {
  const DistributionStats stats = distribution_stats(dist, k);
  std::vector<double> features(dist.probs);
  features.push_back(stats.topk_mean);
  features.push_back(stats.topk_variance);
  return features;
}

SideDistribution synthetic_distribution(double true_value, double sharpness, double bias,
                                        const SideRange& range, Rng& rng, double logit_noise_std) {
  if (sharpness < 0.0 || !std::isfinite(sharpness)) {
    throw std::invalid_argument("sharpness must be finite and nonnegative");
  }
  const double target = true_value + bias;
  if (target < range.s_min || target > range.s_max) {
    throw std::invalid_argument("synthetic distribution target outside side range");
  }
  std::vector<double> logits(range.bin_count);
  for (int i = 0; i < range.bin_count; ++i) {
    const double d = bin_center(range, i) - target;
    logits[i] = -d * d * sharpness;
    if (logit_noise_std > 0.0) logits[i] += rng.gaussian(0.0, logit_noise_std);
  }
  // saturation guard: enormous sharpness would push exp() arguments past the
  // double range before the softmax shift
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  for (double& l : logits) l = std::max(l - max_logit, -700.0) + max_logit;
  return distribution_from_logits(logits, range);
}

SideDistribution shift_distribution(const SideDistribution& dist, double delta) {
  if (!std::isfinite(delta)) throw std::invalid_argument("shift delta must be finite");
  const int n = static_cast<int>(dist.probs.size());
  const double w = bin_width(dist.range);
  SideDistribution out{dist.range, std::vector<double>(dist.probs.size(), 0.0)};
  for (int i = 0; i < n; ++i) {
    const double mass = dist.probs[i];
    if (mass == 0.0) continue;
    const double pos = static_cast<double>(i) + delta / w;  // fractional bin index
    if (pos <= 0.0) {
      out.probs[0] += mass;
    } else if (pos >= static_cast<double>(n - 1)) {
      out.probs[n - 1] += mass;
    } else {
      const int lo = static_cast<int>(std::floor(pos));
      const double frac = pos - static_cast<double>(lo);
      out.probs[lo] += mass * (1.0 - frac);
      out.probs[lo + 1] += mass * frac;
    }
  }
  return out;
}

}  // namespace sideaware
