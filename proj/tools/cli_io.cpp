// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sideaware::cli {

namespace {

using nlohmann::json;

constexpr const char* kDetectionsFormat = "sideaware-detections";
constexpr const char* kPseudoLabelFormat = "sideaware-pseudo-labels";
constexpr int kFormatVersion = 1;

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json box_to_json(const OrientedBox3& box) {
  json j;
  j["center"] = vec3_to_json(box.center);
  j["size"] = vec3_to_json(box.size);
  j["yaw"] = box.yaw;
  return j;
}

OrientedBox3 box_from_json(const json& j) {
  return make_box(vec3_from_json(j.at("center")), vec3_from_json(j.at("size")),
                  j.at("yaw").get<double>());
}

void check_header(std::istream& in, const char* format) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("header: ") + e.what());
  }
  if (header.value("format", "") != format) {
    throw std::runtime_error(std::string("unexpected format, wanted ") + format);
  }
  if (header.value("version", -1) != kFormatVersion) {
    throw std::runtime_error("unsupported format version");
  }
}

json make_header(const char* format) {
  json header;
  header["format"] = format;
  header["version"] = kFormatVersion;
  return header;
}

template <typename Fn>
void for_each_record(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string(what) + " line " + std::to_string(line_number) + ": " +
                               e.what());
    }
    try {
      fn(j);
    } catch (const json::exception& e) {
      throw std::runtime_error(std::string(what) + " line " + std::to_string(line_number) + ": " +
                               e.what());
    }
  }
}

}  // namespace

void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + temp.string());
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + temp.string());
  }
  fs::rename(temp, target);
}

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

void write_detections(std::ostream& out, const std::vector<SceneDetections>& scenes) {
  out << make_header(kDetectionsFormat).dump() << '\n';
  for (const SceneDetections& scene : scenes) {
    json j;
    j["scene_id"] = scene.scene_id;
    json dets = json::array();
    for (const Detection& det : scene.detections) {
      json d;
      d["box"] = box_to_json(det.box);
      d["candidate"] = vec3_to_json(det.candidate);
      d["class_scores"] = det.class_scores;
      d["objectness"] = det.objectness;
      d["predicted_iou"] = det.predicted_iou;
      d["side_uncertainty"] = det.side_uncertainty;
      json probs = json::array();
      for (int s = 0; s < kSideCount; ++s) probs.push_back(det.side_dists[s].probs);
      d["side_probs"] = probs;
      dets.push_back(std::move(d));
    }
    j["detections"] = dets;
    out << j.dump() << '\n';
  }
}

std::vector<SceneDetections> read_detections(std::istream& in, const SideRangeSet& ranges) {
  check_header(in, kDetectionsFormat);
  std::vector<SceneDetections> scenes;
  for_each_record(in, "detections file", [&](const json& j) {
    SceneDetections scene;
    scene.scene_id = j.at("scene_id").get<int>();
    for (const json& d : j.at("detections")) {
      Detection det;
      det.box = box_from_json(d.at("box"));
      det.candidate = vec3_from_json(d.at("candidate"));
      det.class_scores = d.at("class_scores").get<std::vector<double>>();
      det.objectness = d.at("objectness").get<double>();
      det.predicted_iou = d.at("predicted_iou").get<double>();
      const auto uncertainty = d.at("side_uncertainty").get<std::vector<double>>();
      const json& probs = d.at("side_probs");
      if (uncertainty.size() != kSideCount || !probs.is_array() || probs.size() != kSideCount) {
        throw std::runtime_error("detection needs 6 uncertainties and 6 probability vectors");
      }
      for (int s = 0; s < kSideCount; ++s) {
        det.side_uncertainty[s] = uncertainty[s];
        det.side_dists[s].range = ranges[s];
        det.side_dists[s].probs = probs[s].get<std::vector<double>>();
        if (static_cast<int>(det.side_dists[s].probs.size()) != ranges[s].bin_count) {
          throw std::runtime_error("side probability vector length does not match configured bins");
        }
      }
      finalize_class_id(det);
      scene.detections.push_back(std::move(det));
    }
    scenes.push_back(std::move(scene));
  });
  return scenes;
}

std::vector<SceneDetections> read_detections_file(const std::string& path,
                                                  const SideRangeSet& ranges) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open detections file: " + path);
  try {
    return read_detections(in, ranges);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_pseudo_labels(std::ostream& out, const std::vector<ScenePseudoLabels>& scenes) {
  out << make_header(kPseudoLabelFormat).dump() << '\n';
  for (const ScenePseudoLabels& scene : scenes) {
    json j;
    j["scene_id"] = scene.scene_id;
    json labels = json::array();
    for (const PseudoLabel& pl : scene.labels) {
      json p;
      p["box"] = box_to_json(pl.box);
      p["class"] = pl.class_id;
      p["side_quality"] = pl.side_quality;
      p["global_quality"] = pl.global_quality;
      labels.push_back(std::move(p));
    }
    j["pseudo_labels"] = labels;
    out << j.dump() << '\n';
  }
}

std::vector<ScenePseudoLabels> read_pseudo_labels(std::istream& in) {
  check_header(in, kPseudoLabelFormat);
  std::vector<ScenePseudoLabels> scenes;
  for_each_record(in, "pseudo-label file", [&](const json& j) {
    ScenePseudoLabels scene;
    scene.scene_id = j.at("scene_id").get<int>();
    for (const json& p : j.at("pseudo_labels")) {
      PseudoLabel pl;
      pl.box = box_from_json(p.at("box"));
      pl.class_id = p.at("class").get<int>();
      const auto quality = p.at("side_quality").get<std::vector<double>>();
      if (quality.size() != kSideCount) throw std::runtime_error("side_quality needs 6 entries");
      std::copy(quality.begin(), quality.end(), pl.side_quality.begin());
      pl.global_quality = p.at("global_quality").get<double>();
      scene.labels.push_back(std::move(pl));
    }
    scenes.push_back(std::move(scene));
  });
  return scenes;
}

std::vector<ScenePseudoLabels> read_pseudo_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pseudo-label file: " + path);
  try {
    return read_pseudo_labels(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace sideaware::cli
