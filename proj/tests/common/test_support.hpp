// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers and independent oracles for the test suites. Everything in
// here recomputes results through a route different from the library code it
// checks (direct summation, exhaustive scans, point sampling), so a library
// bug cannot cancel out of a comparison.
#ifndef SIDEAWARE_TESTS_TEST_SUPPORT_HPP_
#define SIDEAWARE_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "sideaware/common.hpp"
#include "sideaware/geometry.hpp"
#include "sideaware/soft_pls.hpp"

namespace sideaware::test {

inline OrientedBox3 random_box(Rng& rng) {
  const Vec3 center{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 2.0)};
  const Vec3 size{rng.uniform(0.3, 2.2), rng.uniform(0.3, 2.2), rng.uniform(0.3, 1.8)};
  return make_box(center, size, rng.uniform(-std::numbers::pi, std::numbers::pi));
}

/// A second box overlapping the first: same shape family, jittered pose.
inline OrientedBox3 random_overlapping_box(const OrientedBox3& base, Rng& rng) {
  const Vec3 center = base.center + Vec3{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                                         rng.uniform(-0.25, 0.25)};
  const Vec3 size{base.size.x * rng.uniform(0.7, 1.3), base.size.y * rng.uniform(0.7, 1.3),
                  base.size.z * rng.uniform(0.7, 1.3)};
  return make_box(center, size, base.yaw + rng.uniform(-0.7, 0.7));
}

inline Vec3 random_interior_point(const OrientedBox3& box, Rng& rng) {
  const Vec3 local{rng.uniform(-0.45, 0.45) * box.size.x, rng.uniform(-0.45, 0.45) * box.size.y,
                   rng.uniform(-0.45, 0.45) * box.size.z};
  return box.center + rotate_z(local, box.yaw);
}

/// Point-in-box test independent of the clipping code path.
inline bool point_inside(const OrientedBox3& box, const Vec3& p) {
  const Vec3 local = rotate_z(p - box.center, -box.yaw);
  return std::abs(local.x) <= 0.5 * box.size.x && std::abs(local.y) <= 0.5 * box.size.y &&
         std::abs(local.z) <= 0.5 * box.size.z;
}

struct Aabb {
  double lo[3], hi[3];
};

inline Aabb bounding_aabb(const OrientedBox3& box) {
  const auto corners = box_corners(box);
  Aabb aabb{{corners[0].x, corners[0].y, corners[0].z},
            {corners[0].x, corners[0].y, corners[0].z}};
  for (const Vec3& c : corners) {
    aabb.lo[0] = std::min(aabb.lo[0], c.x);
    aabb.lo[1] = std::min(aabb.lo[1], c.y);
    aabb.lo[2] = std::min(aabb.lo[2], c.z);
    aabb.hi[0] = std::max(aabb.hi[0], c.x);
    aabb.hi[1] = std::max(aabb.hi[1], c.y);
    aabb.hi[2] = std::max(aabb.hi[2], c.z);
  }
  return aabb;
}

/// Monte-Carlo intersection volume on a jittered lattice over the overlap of
/// the two bounding AABBs. `cells` is the lattice resolution per axis, so the
/// sample count is cells^3.
inline double mc_intersection_volume(const OrientedBox3& a, const OrientedBox3& b, int cells,
                                     Rng& rng) {
  const Aabb aa = bounding_aabb(a);
  const Aabb bb = bounding_aabb(b);
  double lo[3], hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::max(aa.lo[d], bb.lo[d]);
    hi[d] = std::min(aa.hi[d], bb.hi[d]);
    if (lo[d] >= hi[d]) return 0.0;
  }
  const double step[3] = {(hi[0] - lo[0]) / cells, (hi[1] - lo[1]) / cells,
                          (hi[2] - lo[2]) / cells};
  long inside = 0;
  for (int ix = 0; ix < cells; ++ix) {
    for (int iy = 0; iy < cells; ++iy) {
      for (int iz = 0; iz < cells; ++iz) {
        const Vec3 p{lo[0] + (ix + rng.uniform()) * step[0], lo[1] + (iy + rng.uniform()) * step[1],
                     lo[2] + (iz + rng.uniform()) * step[2]};
        if (point_inside(a, p) && point_inside(b, p)) ++inside;
      }
    }
  }
  const double cell_volume = step[0] * step[1] * step[2];
  return static_cast<double>(inside) * cell_volume;
}

inline double mc_rotated_iou(const OrientedBox3& a, const OrientedBox3& b, int cells, Rng& rng) {
  const double inter = mc_intersection_volume(a, b, cells, rng);
  const double vol_union = box_volume(a) + box_volume(b) - inter;
  return vol_union > 0.0 ? inter / vol_union : 0.0;
}

/// 2D footprint intersection area by jittered-lattice sampling.
inline double mc_bev_intersection_area(const OrientedBox3& a, const OrientedBox3& b, int cells,
                                       Rng& rng) {
  const Aabb aa = bounding_aabb(a);
  const Aabb bb = bounding_aabb(b);
  double lo[2], hi[2];
  for (int d = 0; d < 2; ++d) {
    lo[d] = std::max(aa.lo[d], bb.lo[d]);
    hi[d] = std::min(aa.hi[d], bb.hi[d]);
    if (lo[d] >= hi[d]) return 0.0;
  }
  auto inside_footprint = [](const OrientedBox3& box, double x, double y) {
    const Vec3 local = rotate_z(Vec3{x, y, 0.0} - Vec3{box.center.x, box.center.y, 0.0}, -box.yaw);
    return std::abs(local.x) <= 0.5 * box.size.x && std::abs(local.y) <= 0.5 * box.size.y;
  };
  const double step[2] = {(hi[0] - lo[0]) / cells, (hi[1] - lo[1]) / cells};
  long inside = 0;
  for (int ix = 0; ix < cells; ++ix) {
    for (int iy = 0; iy < cells; ++iy) {
      const double x = lo[0] + (ix + rng.uniform()) * step[0];
      const double y = lo[1] + (iy + rng.uniform()) * step[1];
      if (inside_footprint(a, x, y) && inside_footprint(b, x, y)) ++inside;
    }
  }
  return static_cast<double>(inside) * step[0] * step[1];
}

/// Closed-form IoU for axis-aligned (yaw = 0) boxes.
inline double axis_aligned_iou(const OrientedBox3& a, const OrientedBox3& b) {
  auto overlap = [](double ca, double sa, double cb, double sb) {
    const double lo = std::max(ca - 0.5 * sa, cb - 0.5 * sb);
    const double hi = std::min(ca + 0.5 * sa, cb + 0.5 * sb);
    return std::max(0.0, hi - lo);
  };
  const double inter = overlap(a.center.x, a.size.x, b.center.x, b.size.x) *
                       overlap(a.center.y, a.size.y, b.center.y, b.size.y) *
                       overlap(a.center.z, a.size.z, b.center.z, b.size.z);
  const double vol_union = box_volume(a) + box_volume(b) - inter;
  return vol_union > 0.0 ? inter / vol_union : 0.0;
}

/// Independent low-half NMS: adjacency scan, DFS components, explicit sort.
inline std::vector<size_t> nms_low_half_oracle(const std::vector<Detection>& dets,
                                               double overlap_threshold) {
  const size_t n = dets.size();
  std::vector<std::vector<size_t>> adjacent(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j || dets[i].class_id != dets[j].class_id) continue;
      if (rotated_iou(dets[i].box, dets[j].box) >= overlap_threshold) adjacent[i].push_back(j);
    }
  }
  std::vector<char> visited(n, 0);
  std::vector<char> keep(n, 0);
  for (size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::vector<size_t> component;
    std::vector<size_t> stack{start};
    visited[start] = 1;
    while (!stack.empty()) {
      const size_t v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (size_t w : adjacent[v]) {
        if (!visited[w]) {
          visited[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(component.begin(), component.end(), [&](size_t x, size_t y) {
      if (dets[x].predicted_iou != dets[y].predicted_iou) {
        return dets[x].predicted_iou > dets[y].predicted_iou;
      }
      if (dets[x].objectness != dets[y].objectness) {
        return dets[x].objectness > dets[y].objectness;
      }
      return x < y;
    });
    const size_t kept = (component.size() + 1) / 2;
    for (size_t k = 0; k < kept; ++k) keep[component[k]] = 1;
  }
  std::vector<size_t> out;
  for (size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

inline double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace sideaware::test

#endif  // SIDEAWARE_TESTS_TEST_SUPPORT_HPP_
