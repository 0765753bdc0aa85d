// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic desk-scale scenes: ground-truth boxes with per-class size
// profiles plus a sparse seed cloud sampled on box faces and scattered
// through the arena.
//
// Seed feature layout (kSeedFeatureDim = 4 channels):
//   0: face observability in [0, 1] - how well this face's geometry is
//      captured; drawn per (box, face) at generation and shared by all seeds
//      on that face. Background seeds carry an uninformative random value.
//   1: point height above the ground plane (meters).
//   2: surface membership - 1 for seeds on a box face, 0 for clutter.
//   3: unstructured nuisance channel.
#ifndef SIDEAWARE_SCENE_HPP_
#define SIDEAWARE_SCENE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "sideaware/geometry.hpp"
#include "sideaware/uncertainty.hpp"

namespace sideaware {

inline constexpr int kSeedFeatureDim = 4;

struct GtBox {
  OrientedBox3 box;
  int class_id = 0;
};

struct SceneSample {
  int scene_id = 0;
  bool labeled = false;
  std::vector<GtBox> ground_truth;
  SeedCloud seeds;
};

/// Inclusive per-dimension size interval of one object class.
struct ClassSizeProfile {
  Vec3 size_min;
  Vec3 size_max;
};

struct SceneConfig {
  double arena_half_extent = 4.0;  // boxes land in [-e, e]^2 on the ground
  int min_boxes = 2;
  int max_boxes = 4;
  std::vector<ClassSizeProfile> class_profiles;  // one entry per class
  int seeds_per_face = 6;
  int background_seeds = 40;
  double max_pairwise_iou = 0.3;
  int placement_retries = 200;
  double observability_noise = 0.02;  // channel-0 jitter on face seeds
};

/// Indoor-flavored default: three classes with distinct size profiles.
SceneConfig default_scene_config();
void validate(const SceneConfig& config);
int num_classes(const SceneConfig& config);

/// Deterministic under the rng seed. Guarantees pairwise rotated IoU below
/// config.max_pairwise_iou and at least one seed within 0.2 m of every face.
/// Throws std::runtime_error if placement keeps failing after the configured
/// retries.
SceneSample generate_scene(const SceneConfig& config, int scene_id, bool labeled, Rng& rng);

/// Per-(box, face) observability as encoded in the seed features near that
/// face: the mean of feature channel 0 interpolated onto a grid of points on
/// the face, clamped to [0, 1].
double face_observability(const SceneSample& scene, const OrientedBox3& box, Side side,
                          int grid = 4, int k_nn = 3);

// --- scene file format -----------------------------------------------------
//
// Line-oriented text: a header line
//   {"format":"sideaware-scenes","version":1,"units":"meters"}
// followed by one JSON object per scene:
//   {"scene_id":int,"labeled":bool,
//    "boxes":[{"center":[x,y,z],"size":[l,w,h],"yaw":r,"class":int},...],
//    "seeds":[{"xyz":[x,y,z],"feature":[...]},...]}
// Distances are meters, yaw is radians in (-pi, pi].

void write_scenes(std::ostream& out, const std::vector<SceneSample>& scenes);
std::vector<SceneSample> read_scenes(std::istream& in);
void write_scenes_file(const std::string& path, const std::vector<SceneSample>& scenes);
std::vector<SceneSample> read_scenes_file(const std::string& path);

}  // namespace sideaware

#endif  // SIDEAWARE_SCENE_HPP_
