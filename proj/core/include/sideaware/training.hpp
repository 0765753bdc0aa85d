// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-stage training at desk scale. The pretrain stage fits the uncertainty
// head on labeled scenes. The semi-supervised stage trains a student
// "detector" - the uncertainty head plus a learnable per-side bias correction
// applied to the synthetic detector's side distributions - against labeled
// scenes and teacher pseudo-labels, with the teacher parameters tracking the
// student by exponential moving average.
#ifndef SIDEAWARE_TRAINING_HPP_
#define SIDEAWARE_TRAINING_HPP_

#include "sideaware/evaluation.hpp"
#include "sideaware/losses.hpp"
#include "sideaware/scene.hpp"
#include "sideaware/soft_pls.hpp"
#include "sideaware/teacher.hpp"
#include "sideaware/uncertainty.hpp"

namespace sideaware {

// --- EMA ---------------------------------------------------------------

struct EmaState {
  std::vector<double> teacher;
  std::vector<double> student;
  double momentum = 0.999;  // in [0, 1)
};

/// teacher <- momentum * teacher + (1 - momentum) * student, element-wise.
/// Throws std::invalid_argument on a length mismatch.
void ema_update(EmaState& state);

// --- scene augmentation --------------------------------------------------

/// Rigid scene transform: rotation about +z at the origin, then translation.
struct RigidTransform {
  double yaw = 0.0;
  Vec3 translation;
};

Vec3 apply(const RigidTransform& t, const Vec3& p);
OrientedBox3 apply(const RigidTransform& t, const OrientedBox3& box);
SceneSample apply(const RigidTransform& t, const SceneSample& scene);
RigidTransform inverse(const RigidTransform& t);
RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);  // outer after inner
RigidTransform random_transform(Rng& rng, double max_translation);

// --- student model ---------------------------------------------------------

/// The trainable stand-in for a detector: the uncertainty head plus an
/// additive per-side correction applied to predicted side distributions.
struct StudentState {
  UncertaintyModel head;
  SideArray side_bias{};
};

std::vector<double> flatten(const StudentState& state);
StudentState unflatten(const ModelShape& shape, std::span<const double> flat);

/// Shifts each side distribution by the bias, recomputes the side
/// expectations and reassembles the box. Scores and uncertainties are
/// carried over; callers that need uncertainties for the refined box must
/// re-estimate them.
Detection refine_detection(const Detection& det, const SideArray& side_bias);

// --- pretraining -------------------------------------------------------

struct PretrainOptions {
  TeacherOptions teacher;
  ModelShape shape{kSeedFeatureDim + 3, 32, 34, 64};  // +3: box-frame point coords
  int epochs = 60;
  int batch_size = 128;
  double learning_rate = 0.5;
  double match_iou = 0.25;
  uint64_t seed = 1;
};

struct PretrainReport {
  std::vector<double> epoch_losses;  // full-set loss at the start of each epoch
  int sample_count = 0;
};

struct PretrainResult {
  UncertaintyModel model;
  PretrainReport report;
};

/// Builds (geometry features, distribution features, label) triples from
/// noisy detections on the labeled scenes and fits the head by minibatch
/// gradient descent. Deterministic under the seed. Throws std::runtime_error
/// on divergence (non-finite loss).
PretrainResult run_pretrain(const std::vector<SceneSample>& labeled,
                            const PretrainOptions& options);

/// The training triples themselves, for held-out correlation checks.
std::vector<UncertaintyTrainingSample> build_uncertainty_samples(
    const std::vector<SceneSample>& scenes, const UncertaintyModel& model,
    const PretrainOptions& options);

// --- semi-supervised stage ---------------------------------------------

struct SslOptions {
  TeacherOptions teacher;            // pseudo-label generation pass
  NoiseModel student_noise;          // the student's own raw-prediction pass
  SelectionConfig selection;
  LossConfig loss;
  int iterations = 300;
  int labeled_per_iter = 1;
  int unlabeled_per_iter = 1;
  double bias_learning_rate = 0.05;
  double head_learning_rate = 0.2;
  double ema_momentum = 0.99;
  double match_iou = 0.25;
  bool side_aware_weighting = true;  // false: all pseudo-label weights forced to 1
  bool oracle_pseudo_uncertainty = false;  // true: quality from ground-truth side errors
  int checkpoint_interval = 50;
  int counter_reset_interval = 0;    // reset class counters every k iterations; 0 = never
  double aug_max_translation = 0.5;  // yaw augmentation always spans the full circle
  uint64_t seed = 1;
  std::vector<double> eval_iou_thresholds{0.25, 0.5};
};

struct SslCheckpointRow {
  int iteration = 0;
  double supervised_loss = 0.0;
  double unsupervised_loss = 0.0;
  long pseudo_label_count = 0;
  double mean_pseudo_quality = 0.0;
  double weighted_side_error = 0.0;    // quality-weighted error of accepted supervision
  double unweighted_side_error = 0.0;
  std::vector<double> mean_ap;         // one entry per eval threshold
};

struct SslResult {
  StudentState student;
  StudentState teacher;
  std::vector<SslCheckpointRow> rows;
};

/// Mean-teacher loop: per iteration, sample labeled and unlabeled scenes,
/// push differently-augmented copies through the teacher and student passes,
/// select pseudo-labels from the teacher output, take one gradient step on
/// the total loss (supervised + beta * quality-weighted unsupervised), and
/// blend the teacher toward the student. Deterministic under the seed.
SslResult run_ssl(const std::vector<SceneSample>& labeled,
                  const std::vector<SceneSample>& unlabeled,
                  const UncertaintyModel& pretrained, const SslOptions& options,
                  const std::vector<SceneSample>* eval_scenes = nullptr);

/// Refines raw synthetic detections on each scene with the student's side
/// bias and scores them for AP evaluation. The rng stream is derived from
/// (options seed, scene id), so repeated calls see identical raw detections.
std::vector<ScenePredictions> evaluate_detector(const std::vector<SceneSample>& scenes,
                                                const StudentState& student,
                                                const SslOptions& options);

}  // namespace sideaware

#endif  // SIDEAWARE_TRAINING_HPP_
