// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SIDEAWARE_COMMON_HPP_
#define SIDEAWARE_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sideaware {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  bool operator==(const Vec3& o) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(squared_norm(v)); }

/// Rotation about +z, counterclockwise when viewed from above.
inline Vec3 rotate_z(const Vec3& v, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

/// Normalizes an angle into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source. All sampling goes through explicit uniform
/// draws so that streams are reproducible across platforms for a given seed.
/// fork() derives an independent stream from the original seed and a tag,
/// which keeps per-scene / per-purpose streams stable no matter how much of
/// the parent stream has been consumed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : base_seed_(seed), engine_(splitmix64(seed)) {}

  Rng fork(uint64_t tag_a, uint64_t tag_b = 0, uint64_t tag_c = 0) const {
    uint64_t s = splitmix64(base_seed_ ^ (0x9e3779b97f4a7c15ULL * (tag_a + 1)));
    s = splitmix64(s ^ (0xd1342543de82ef95ULL * (tag_b + 1)));
    s = splitmix64(s ^ (0xaf251af3b0f025b5ULL * (tag_c + 1)));
    return Rng(s);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int requires n > 0");
    // modulo bias is irrelevant at the n used here (n << 2^64)
    return engine_() % n;
  }

  /// Standard normal via Box-Muller on two uniform draws (no cached spare,
  /// so the draw count per call is fixed and streams stay predictable).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double mean, double std_dev) { return mean + std_dev * gaussian(); }

  uint64_t base_seed() const { return base_seed_; }

 private:
  uint64_t base_seed_;
  std::mt19937_64 engine_;
};

}  // namespace sideaware

#endif  // SIDEAWARE_COMMON_HPP_
