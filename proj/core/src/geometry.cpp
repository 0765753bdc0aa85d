// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/geometry.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace sideaware {

namespace {

constexpr double kSliverArea = 1e-12;

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

struct Vec2 {
  double x, y;
};

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// BEV footprint corners in counterclockwise order.
std::array<Vec2, 4> footprint(const OrientedBox3& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hx = 0.5 * box.size.x;
  const double hy = 0.5 * box.size.y;
  auto world = [&](double lx, double ly) -> Vec2 {
    return {box.center.x + c * lx - s * ly, box.center.y + s * lx + c * ly};
  };
  return {world(hx, -hy), world(hx, hy), world(-hx, hy), world(-hx, -hy)};
}

double polygon_area(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.y - p.y * q.x;
  }
  return 0.5 * std::abs(twice);
}

/// Sutherland-Hodgman: clip `subject` against the half plane to the left of
/// edge (e0, e1). Points exactly on the edge are kept.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& subject, const Vec2& e0, const Vec2& e1) {
  std::vector<Vec2> out;
  out.reserve(subject.size() + 1);
  const size_t n = subject.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& cur = subject[i];
    const Vec2& nxt = subject[(i + 1) % n];
    const double dc = cross(e0, e1, cur);
    const double dn = cross(e0, e1, nxt);
    if (dc >= 0.0) out.push_back(cur);
    if ((dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

double footprint_area(const OrientedBox3& box) {
  const auto f = footprint(box);
  return polygon_area({f.begin(), f.end()});
}

}  // namespace

Side side_from_index(int i) {
  if (i < 0 || i >= kSideCount) throw std::invalid_argument("side index out of range: " + std::to_string(i));
  return static_cast<Side>(i);
}

const char* side_name(Side s) {
  switch (s) {
    case Side::kTop: return "top";
    case Side::kDown: return "down";
    case Side::kLeft: return "left";
    case Side::kRight: return "right";
    case Side::kFront: return "front";
    case Side::kBack: return "back";
  }
  throw std::invalid_argument("invalid side");
}

Side side_from_name(const char* name) {
  for (Side s : kAllSides) {
    if (std::strcmp(side_name(s), name) == 0) return s;
  }
  throw std::invalid_argument(std::string("unknown side name: ") + name);
}

OrientedBox3 make_box(const Vec3& center, const Vec3& size, double yaw) {
  if (!finite(center) || !finite(size) || !std::isfinite(yaw)) {
    throw std::invalid_argument("box fields must be finite");
  }
  if (size.x <= 0.0 || size.y <= 0.0 || size.z <= 0.0) {
    throw std::invalid_argument("box size components must be strictly positive");
  }
  return {center, size, normalize_angle(yaw)};
}

double box_volume(const OrientedBox3& box) { return box.size.x * box.size.y * box.size.z; }

bool contains_point(const OrientedBox3& box, const Vec3& p) {
  const Vec3 local = rotate_z(p - box.center, -box.yaw);
  return std::abs(local.x) <= 0.5 * box.size.x && std::abs(local.y) <= 0.5 * box.size.y &&
         std::abs(local.z) <= 0.5 * box.size.z;
}

OrientedBox3 box_from_sides(const SideDistances& sd) {
  const double front = sd.distance[side_index(Side::kFront)];
  const double back = sd.distance[side_index(Side::kBack)];
  const double left = sd.distance[side_index(Side::kLeft)];
  const double right = sd.distance[side_index(Side::kRight)];
  const double top = sd.distance[side_index(Side::kTop)];
  const double down = sd.distance[side_index(Side::kDown)];
  if (front + back <= 0.0 || left + right <= 0.0 || top + down <= 0.0) {
    throw std::invalid_argument("degenerate side distances: an opposing pair sums to <= 0");
  }
  const Vec3 size{front + back, left + right, top + down};
  const Vec3 offset = rotate_z({0.5 * (front - back), 0.5 * (left - right), 0.0}, sd.yaw);
  const Vec3 center = sd.candidate + offset + Vec3{0.0, 0.0, 0.5 * (top - down)};
  return {center, size, normalize_angle(sd.yaw)};
}

SideDistances sides_from_box(const Vec3& candidate, const OrientedBox3& box) {
  if (!contains_point(box, candidate)) {
    throw std::invalid_argument("candidate point lies outside the box");
  }
  const Vec3 local = rotate_z(candidate - box.center, -box.yaw);
  SideDistances sd;
  sd.candidate = candidate;
  sd.yaw = box.yaw;
  sd.distance[side_index(Side::kFront)] = 0.5 * box.size.x - local.x;
  sd.distance[side_index(Side::kBack)] = 0.5 * box.size.x + local.x;
  sd.distance[side_index(Side::kLeft)] = 0.5 * box.size.y - local.y;
  sd.distance[side_index(Side::kRight)] = 0.5 * box.size.y + local.y;
  sd.distance[side_index(Side::kTop)] = 0.5 * box.size.z - local.z;
  sd.distance[side_index(Side::kDown)] = 0.5 * box.size.z + local.z;
  return sd;
}

Vec3 face_normal(const OrientedBox3& box, Side s) {
  switch (s) {
    case Side::kTop: return {0.0, 0.0, 1.0};
    case Side::kDown: return {0.0, 0.0, -1.0};
    case Side::kLeft: return rotate_z({0.0, 1.0, 0.0}, box.yaw);
    case Side::kRight: return rotate_z({0.0, -1.0, 0.0}, box.yaw);
    case Side::kFront: return rotate_z({1.0, 0.0, 0.0}, box.yaw);
    case Side::kBack: return rotate_z({-1.0, 0.0, 0.0}, box.yaw);
  }
  throw std::invalid_argument("invalid side");
}

Vec3 face_center(const OrientedBox3& box, Side s) {
  double half = 0.0;
  switch (s) {
    case Side::kTop:
    case Side::kDown: half = 0.5 * box.size.z; break;
    case Side::kLeft:
    case Side::kRight: half = 0.5 * box.size.y; break;
    case Side::kFront:
    case Side::kBack: half = 0.5 * box.size.x; break;
  }
  return box.center + face_normal(box, s) * half;
}

SideArray side_targets_in_frame(const Vec3& candidate, double yaw, const OrientedBox3& box) {
  SideArray targets{};
  const OrientedBox3 frame{{0, 0, 0}, {1, 1, 1}, yaw};
  for (Side s : kAllSides) {
    const Vec3 dir = face_normal(frame, s);
    const Vec3 n = face_normal(box, s);
    const double den = dot(dir, n);
    if (std::abs(den) < 1e-6) {
      throw std::invalid_argument("observer frame axis nearly parallel to target face plane");
    }
    targets[side_index(s)] = dot(face_center(box, s) - candidate, n) / den;
  }
  return targets;
}

std::array<Vec3, 8> box_corners(const OrientedBox3& box) {
  std::array<Vec3, 8> corners;
  for (int i = 0; i < 8; ++i) {
    const double sx = (i & 1) ? 0.5 : -0.5;
    const double sy = (i & 2) ? 0.5 : -0.5;
    const double sz = (i & 4) ? 0.5 : -0.5;
    corners[i] = box.center + rotate_z({sx * box.size.x, sy * box.size.y, sz * box.size.z}, box.yaw);
  }
  return corners;
}

OrientedBox3 box_from_corners(const std::array<Vec3, 8>& corners) {
  Vec3 centroid{};
  for (const Vec3& c : corners) centroid = centroid + c;
  centroid = centroid * 0.125;
  const Vec3 x_edge = corners[1] - corners[0];
  const Vec3 y_edge = corners[2] - corners[0];
  const Vec3 z_edge = corners[4] - corners[0];
  const Vec3 size{norm(x_edge), norm(y_edge), norm(z_edge)};
  const double yaw = std::atan2(x_edge.y, x_edge.x);
  return make_box(centroid, size, yaw);
}

double bev_intersection_area(const OrientedBox3& a, const OrientedBox3& b) {
  const auto fa = footprint(a);
  const auto fb = footprint(b);
  std::vector<Vec2> poly(fa.begin(), fa.end());
  for (int i = 0; i < 4 && !poly.empty(); ++i) {
    poly = clip_halfplane(poly, fb[i], fb[(i + 1) % 4]);
  }
  const double area = polygon_area(poly);
  return area < kSliverArea ? 0.0 : area;
}

double rotated_iou(const OrientedBox3& a, const OrientedBox3& b) {
  const double za_lo = a.center.z - 0.5 * a.size.z;
  const double za_hi = a.center.z + 0.5 * a.size.z;
  const double zb_lo = b.center.z - 0.5 * b.size.z;
  const double zb_hi = b.center.z + 0.5 * b.size.z;
  const double z_overlap = std::min(za_hi, zb_hi) - std::max(za_lo, zb_lo);
  if (z_overlap <= 0.0) return 0.0;
  const double inter_area = bev_intersection_area(a, b);
  if (inter_area <= 0.0) return 0.0;
  const double inter_vol = inter_area * z_overlap;
  const double vol_a = footprint_area(a) * a.size.z;
  const double vol_b = footprint_area(b) * b.size.z;
  const double union_vol = vol_a + vol_b - inter_vol;
  if (union_vol <= 0.0) return 0.0;
  return std::clamp(inter_vol / union_vol, 0.0, 1.0);
}

}  // namespace sideaware
