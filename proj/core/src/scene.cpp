// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/scene.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sideaware {

namespace {

using nlohmann::json;

constexpr const char* kSceneFormat = "sideaware-scenes";
constexpr int kSceneVersion = 1;

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

SceneConfig default_scene_config() {
  SceneConfig config;
  config.class_profiles = {
      {{0.45, 0.45, 0.8}, {0.7, 0.7, 1.1}},    // seat-sized
      {{1.2, 0.7, 0.55}, {2.0, 1.1, 0.8}},     // table-sized
      {{0.5, 0.35, 1.2}, {1.1, 0.6, 1.8}},     // cabinet-sized
  };
  return config;
}

void validate(const SceneConfig& config) {
  if (config.arena_half_extent <= 0.0) {
    throw std::invalid_argument("scene config: arena_half_extent must be > 0");
  }
  if (config.min_boxes < 1 || config.max_boxes < config.min_boxes) {
    throw std::invalid_argument("scene config: need 1 <= min_boxes <= max_boxes");
  }
  if (config.class_profiles.empty()) {
    throw std::invalid_argument("scene config: at least one class profile required");
  }
  for (const ClassSizeProfile& p : config.class_profiles) {
    if (p.size_min.x <= 0 || p.size_min.y <= 0 || p.size_min.z <= 0 ||
        p.size_max.x < p.size_min.x || p.size_max.y < p.size_min.y ||
        p.size_max.z < p.size_min.z) {
      throw std::invalid_argument("scene config: malformed class size profile");
    }
  }
  if (config.seeds_per_face < 1) {
    throw std::invalid_argument("scene config: seeds_per_face must be >= 1");
  }
  if (config.background_seeds < 0) {
    throw std::invalid_argument("scene config: background_seeds must be >= 0");
  }
  if (config.max_pairwise_iou <= 0.0 || config.max_pairwise_iou > 1.0) {
    throw std::invalid_argument("scene config: max_pairwise_iou must be in (0, 1]");
  }
  if (config.placement_retries < 1) {
    throw std::invalid_argument("scene config: placement_retries must be >= 1");
  }
}

int num_classes(const SceneConfig& config) {
  return static_cast<int>(config.class_profiles.size());
}

SceneSample generate_scene(const SceneConfig& config, int scene_id, bool labeled, Rng& rng) {
  validate(config);
  SceneSample scene;
  scene.scene_id = scene_id;
  scene.labeled = labeled;

  const int box_count =
      config.min_boxes + static_cast<int>(rng.uniform_int(
                             static_cast<uint64_t>(config.max_boxes - config.min_boxes + 1)));

  for (int b = 0; b < box_count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < config.placement_retries && !placed; ++attempt) {
      const int class_id = static_cast<int>(rng.uniform_int(config.class_profiles.size()));
      const ClassSizeProfile& profile = config.class_profiles[class_id];
      const Vec3 size{rng.uniform(profile.size_min.x, profile.size_max.x),
                      rng.uniform(profile.size_min.y, profile.size_max.y),
                      rng.uniform(profile.size_min.z, profile.size_max.z)};
      const Vec3 center{rng.uniform(-config.arena_half_extent, config.arena_half_extent),
                        rng.uniform(-config.arena_half_extent, config.arena_half_extent),
                        0.5 * size.z + rng.uniform(0.0, 0.1)};
      const double yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
      const OrientedBox3 box = make_box(center, size, yaw);

      bool clear = true;
      for (const GtBox& other : scene.ground_truth) {
        if (rotated_iou(box, other.box) >= config.max_pairwise_iou) {
          clear = false;
          break;
        }
      }
      if (clear) {
        scene.ground_truth.push_back({box, class_id});
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("scene generation: could not place box " + std::to_string(b) +
                               " after " + std::to_string(config.placement_retries) + " retries");
    }
  }

  // face seeds: jittered positions on each face, all carrying that face's
  // observability in channel 0
  for (const GtBox& gt : scene.ground_truth) {
    for (Side side : kAllSides) {
      const double observability = rng.uniform();
      const Vec3 normal = face_normal(gt.box, side);
      const Vec3 fc = face_center(gt.box, side);
      // in-plane basis from the two box axes orthogonal to the face normal
      Vec3 u_axis, v_axis;
      double u_half, v_half;
      if (side == Side::kTop || side == Side::kDown) {
        u_axis = rotate_z({1, 0, 0}, gt.box.yaw);
        v_axis = rotate_z({0, 1, 0}, gt.box.yaw);
        u_half = 0.5 * gt.box.size.x;
        v_half = 0.5 * gt.box.size.y;
      } else if (side == Side::kLeft || side == Side::kRight) {
        u_axis = rotate_z({1, 0, 0}, gt.box.yaw);
        v_axis = {0, 0, 1};
        u_half = 0.5 * gt.box.size.x;
        v_half = 0.5 * gt.box.size.z;
      } else {
        u_axis = rotate_z({0, 1, 0}, gt.box.yaw);
        v_axis = {0, 0, 1};
        u_half = 0.5 * gt.box.size.y;
        v_half = 0.5 * gt.box.size.z;
      }
      for (int k = 0; k < config.seeds_per_face; ++k) {
        // first seed at the face center so coverage holds even for one seed
        const double su = (k == 0) ? 0.0 : rng.uniform(-0.9, 0.9) * u_half;
        const double sv = (k == 0) ? 0.0 : rng.uniform(-0.9, 0.9) * v_half;
        const Vec3 p = fc + u_axis * su + v_axis * sv + normal * rng.uniform(-0.01, 0.01);
        scene.seeds.points.push_back(p);
        scene.seeds.features.push_back(
            {observability + rng.gaussian(0.0, config.observability_noise), p.z, 1.0,
             rng.gaussian(0.0, 0.5)});
      }
    }
  }

  for (int k = 0; k < config.background_seeds; ++k) {
    const Vec3 p{rng.uniform(-config.arena_half_extent, config.arena_half_extent),
                 rng.uniform(-config.arena_half_extent, config.arena_half_extent),
                 rng.uniform(0.0, 2.2)};
    scene.seeds.points.push_back(p);
    scene.seeds.features.push_back({rng.uniform(), p.z, 0.0, rng.gaussian(0.0, 0.5)});
  }

  return scene;
}

double face_observability(const SceneSample& scene, const OrientedBox3& box, Side side,
                          int grid, int k_nn) {
  const SidePointSet points = generate_side_points(box, side, grid);
  const auto features = interpolate_features(points, scene.seeds, k_nn);
  double total = 0.0;
  for (const std::vector<double>& f : features) total += f.at(0);
  const double mean = total / static_cast<double>(features.size());
  return std::clamp(mean, 0.0, 1.0);
}

void write_scenes(std::ostream& out, const std::vector<SceneSample>& scenes) {
  json header;
  header["format"] = kSceneFormat;
  header["version"] = kSceneVersion;
  header["units"] = "meters";
  out << header.dump() << '\n';
  for (const SceneSample& scene : scenes) {
    json j;
    j["scene_id"] = scene.scene_id;
    j["labeled"] = scene.labeled;
    json boxes = json::array();
    for (const GtBox& gt : scene.ground_truth) {
      json b;
      b["center"] = vec3_to_json(gt.box.center);
      b["size"] = vec3_to_json(gt.box.size);
      b["yaw"] = gt.box.yaw;
      b["class"] = gt.class_id;
      boxes.push_back(b);
    }
    j["boxes"] = boxes;
    json seeds = json::array();
    for (size_t i = 0; i < scene.seeds.points.size(); ++i) {
      json s;
      s["xyz"] = vec3_to_json(scene.seeds.points[i]);
      s["feature"] = scene.seeds.features[i];
      seeds.push_back(s);
    }
    j["seeds"] = seeds;
    out << j.dump() << '\n';
  }
}

std::vector<SceneSample> read_scenes(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("scene file: missing header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("scene file header: ") + e.what());
  }
  if (header.value("format", "") != kSceneFormat) {
    throw std::runtime_error("scene file: unexpected format field in header");
  }
  if (header.value("version", -1) != kSceneVersion) {
    throw std::runtime_error("scene file: unsupported version");
  }

  std::vector<SceneSample> scenes;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("scene file line " + std::to_string(line_number) + ": " + e.what());
    }
    SceneSample scene;
    scene.scene_id = j.at("scene_id").get<int>();
    scene.labeled = j.at("labeled").get<bool>();
    for (const json& b : j.at("boxes")) {
      GtBox gt;
      gt.box = make_box(vec3_from_json(b.at("center")), vec3_from_json(b.at("size")),
                        b.at("yaw").get<double>());
      gt.class_id = b.at("class").get<int>();
      scene.ground_truth.push_back(gt);
    }
    for (const json& s : j.at("seeds")) {
      scene.seeds.points.push_back(vec3_from_json(s.at("xyz")));
      scene.seeds.features.push_back(s.at("feature").get<std::vector<double>>());
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void write_scenes_file(const std::string& path, const std::vector<SceneSample>& scenes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open scene file for writing: " + path);
  write_scenes(out, scenes);
  if (!out) throw std::runtime_error("scene file write failed: " + path);
}

std::vector<SceneSample> read_scenes_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  return read_scenes(in);
}

}  // namespace sideaware
