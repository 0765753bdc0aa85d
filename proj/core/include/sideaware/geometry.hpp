// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gravity-aligned oriented 3D boxes, the six-side distance parameterization,
// and rotated IoU via convex footprint clipping.
//
// Frame convention (frozen for the whole project): in a box's local frame,
// +x points to the front face, +y to the left face, +z to the top face. yaw
// rotates the local frame about +z, counterclockwise viewed from above, and
// is kept in (-pi, pi]. Axis-aligned boxes are simply yaw = 0.
#ifndef SIDEAWARE_GEOMETRY_HPP_
#define SIDEAWARE_GEOMETRY_HPP_

#include <array>

#include "sideaware/common.hpp"

namespace sideaware {

enum class Side : int { kTop = 0, kDown = 1, kLeft = 2, kRight = 3, kFront = 4, kBack = 5 };

inline constexpr int kSideCount = 6;

inline constexpr std::array<Side, kSideCount> kAllSides = {
    Side::kTop, Side::kDown, Side::kLeft, Side::kRight, Side::kFront, Side::kBack};

constexpr int side_index(Side s) { return static_cast<int>(s); }
Side side_from_index(int i);
const char* side_name(Side s);
Side side_from_name(const char* name);

using SideArray = std::array<double, kSideCount>;

/// Gravity-aligned box: full extents in `size` (x: front-back, y: left-right,
/// z: top-down), yaw in (-pi, pi].
struct OrientedBox3 {
  Vec3 center;
  Vec3 size;
  double yaw = 0.0;
};

/// Validates sizes and normalizes yaw; throws std::invalid_argument on
/// non-positive or non-finite inputs.
OrientedBox3 make_box(const Vec3& center, const Vec3& size, double yaw);

double box_volume(const OrientedBox3& box);
bool contains_point(const OrientedBox3& box, const Vec3& p);

/// Distances from a candidate point to the six faces, measured along the
/// box's local axes. All six are nonnegative iff the candidate is inside.
struct SideDistances {
  SideArray distance{};
  Vec3 candidate;
  double yaw = 0.0;
};

/// Inverse of sides_from_box. Throws std::invalid_argument if any opposing
/// pair of distances sums to <= 0 (degenerate box).
OrientedBox3 box_from_sides(const SideDistances& sd);

/// Throws std::invalid_argument if the candidate lies outside the box.
SideDistances sides_from_box(const Vec3& candidate, const OrientedBox3& box);

/// Distances from `candidate` to the six faces of `box`, measured along the
/// axes of an observer frame with the given yaw (ray/face-plane distances).
/// Coincides with sides_from_box when yaw == box.yaw. Throws
/// std::invalid_argument when a frame axis is nearly parallel to a face
/// (|cos| < 1e-6), which only happens for yaw mismatches near 90 degrees.
SideArray side_targets_in_frame(const Vec3& candidate, double yaw, const OrientedBox3& box);

/// Corner order: index bit 0 -> +x half (front), bit 1 -> +y half (left),
/// bit 2 -> +z half (top); a cleared bit selects the opposite half.
std::array<Vec3, 8> box_corners(const OrientedBox3& box);

/// Inverse fit of box_corners. Expects corners in box_corners() order.
OrientedBox3 box_from_corners(const std::array<Vec3, 8>& corners);

/// Face center and outward unit normal of one side.
Vec3 face_center(const OrientedBox3& box, Side s);
Vec3 face_normal(const OrientedBox3& box, Side s);

/// Area of the intersection of the two yaw-rotated BEV footprints, by
/// successive half-plane clipping. Slivers below 1e-12 m^2 collapse to zero.
double bev_intersection_area(const OrientedBox3& a, const OrientedBox3& b);

/// Rotated 3D IoU: BEV footprint intersection times vertical overlap, over
/// the union volume. Symmetric, in [0, 1], invariant under a common rigid
/// transform. Volumes are derived from the same footprint-area route as the
/// intersection so that identical boxes give exactly 1.
double rotated_iou(const OrientedBox3& a, const OrientedBox3& b);

}  // namespace sideaware

#endif  // SIDEAWARE_GEOMETRY_HPP_
