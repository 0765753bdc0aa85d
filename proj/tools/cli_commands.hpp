// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// The CLI subcommands as plain functions over a validated RunConfig, so the
// same code paths run from main() and from tests. Commands throw ConfigError
// for configuration/input-path problems (exit 1) and std::runtime_error for
// runtime failures (exit 2).
#ifndef SIDEAWARE_TOOLS_CLI_COMMANDS_HPP_
#define SIDEAWARE_TOOLS_CLI_COMMANDS_HPP_

#include <iosfwd>
#include <string>

#include "sideaware/config.hpp"

namespace sideaware::cli {

struct GenOptions {
  std::string detections_out;  // optional: dump synthetic detections for the unlabeled split
};

/// Writes the labeled/unlabeled/eval scene splits (and optionally a
/// detections file) per the config. Prints per-split counts.
void cmd_gen(const RunConfig& config, const GenOptions& options, std::ostream& log);

/// Fits the uncertainty head on the labeled split; writes the checkpoint and
/// <report_dir>/pretrain_report.csv (one row per epoch).
void cmd_pretrain(const RunConfig& config, std::ostream& log);

/// Runs the semi-supervised stage from the pretrained checkpoint; writes
/// <report_dir>/student.ckpt, <report_dir>/teacher.ckpt and
/// <report_dir>/ssl_report.csv (one row per checkpoint).
void cmd_ssl(const RunConfig& config, std::ostream& log);

/// Filters a detections file into a pseudo-label file.
void cmd_filter(const RunConfig& config, const std::string& detections_path,
                const std::string& output_path, std::ostream& log);

struct EvalOptions {
  std::string predictions_path;    // detections file for AP (optional)
  std::string pseudo_labels_path;  // pseudo-label file for side statistics (optional)
  std::string ground_truth_path;   // scene file with ground truth (required)
};

/// Writes <report_dir>/ap_table.csv and <report_dir>/eval_summary.json.
void cmd_eval(const RunConfig& config, const EvalOptions& options, std::ostream& log);

/// Renders a saved report file (pretrain or ssl CSV) as a console summary.
void cmd_report(const std::string& report_path, std::ostream& log);

/// Full argument parsing + dispatch. Returns the process exit code:
/// 0 success, 1 usage/config error, 2 runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace sideaware::cli

#endif  // SIDEAWARE_TOOLS_CLI_COMMANDS_HPP_
