// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented JSON files for detections and pseudo-labels, atomic file
// writes, and deterministic report formatting.
#ifndef SIDEAWARE_TOOLS_CLI_IO_HPP_
#define SIDEAWARE_TOOLS_CLI_IO_HPP_

#include <functional>
#include <string>
#include <vector>

#include "sideaware/distribution.hpp"
#include "sideaware/evaluation.hpp"
#include "sideaware/soft_pls.hpp"

namespace sideaware::cli {

/// Writes via a temp file in the same directory plus rename, so interrupted
/// runs never leave a truncated artifact. Creates parent directories.
void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& writer);

std::string format_double(double v);

struct SceneDetections {
  int scene_id = 0;
  std::vector<Detection> detections;
};

// Detections file: header {"format":"sideaware-detections","version":1},
// then one {"scene_id":...,"detections":[...]} object per line. Each
// detection carries box {center,size,yaw}, candidate, class_scores,
// objectness, predicted_iou, side_uncertainty, and the six per-side
// probability vectors (interpreted against the run's side ranges).
void write_detections(std::ostream& out, const std::vector<SceneDetections>& scenes);
std::vector<SceneDetections> read_detections(std::istream& in, const SideRangeSet& ranges);
std::vector<SceneDetections> read_detections_file(const std::string& path,
                                                  const SideRangeSet& ranges);

// Pseudo-label file: header {"format":"sideaware-pseudo-labels","version":1},
// then one {"scene_id":...,"pseudo_labels":[...]} object per line.
void write_pseudo_labels(std::ostream& out, const std::vector<ScenePseudoLabels>& scenes);
std::vector<ScenePseudoLabels> read_pseudo_labels(std::istream& in);
std::vector<ScenePseudoLabels> read_pseudo_labels_file(const std::string& path);

}  // namespace sideaware::cli

#endif  // SIDEAWARE_TOOLS_CLI_IO_HPP_
