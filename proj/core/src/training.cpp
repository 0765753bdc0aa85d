// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sideaware {

namespace {

// rng stream tags
enum StreamTag : uint64_t {
  kStreamInit = 1,
  kStreamDataset = 2,
  kStreamShuffle = 3,
  kStreamSampleLabeled = 4,
  kStreamSampleUnlabeled = 5,
  kStreamAugTeacher = 6,
  kStreamAugStudent = 7,
  kStreamTeacherPass = 8,
  kStreamStudentPass = 9,
  kStreamLabeledPass = 10,
  kStreamEval = 11,
  kStreamAugLabeled = 12,
};

constexpr double kUncertaintyEps = 1e-6;

/// Appends head-training samples for every source-matched detection of one
/// scene. `sources` maps detections to their ground-truth index (-1 for
/// spurious detections, which carry no usable label).
void append_samples(std::vector<UncertaintyTrainingSample>& out,
                    const std::vector<Detection>& dets, const std::vector<int>& sources,
                    const SceneSample& scene, const UncertaintyModel& model,
                    const TeacherOptions& teacher) {
  for (size_t d = 0; d < dets.size(); ++d) {
    const int g = sources[d];
    if (g < 0) continue;
    const Detection& det = dets[d];
    const OrientedBox3& gt_box = scene.ground_truth[g].box;
    SideArray targets;
    try {
      targets = side_targets_in_frame(det.candidate, det.box.yaw, gt_box);
    } catch (const std::invalid_argument&) {
      continue;  // degenerate frame alignment; skip the detection
    }
    const SideDistances own = sides_from_box(det.candidate, det.box);
    for (Side side : kAllSides) {
      const int s = side_index(side);
      UncertaintyTrainingSample sample;
      sample.geo_features = model.pooled_side_features(det.box, side, scene.seeds,
                                                       teacher.side_point_grid, teacher.k_nn);
      sample.dist_features = distribution_features(det.side_dists[s], teacher.top_k);
      sample.label = uncertainty_label(targets[s], own.distance[s], teacher.label_scale);
      out.push_back(std::move(sample));
    }
  }
}

/// Training-time assignment of detections to target boxes: greedy by
/// objectness, each detection claims the unclaimed same-class target that
/// contains its candidate point (nearest center on ties). Candidate points
/// are sampled inside the source object, so containment identifies the
/// target regardless of how distorted the predicted extents are.
std::vector<int> match_candidates_to_targets(const std::vector<Detection>& dets,
                                             const std::vector<GtBox>& targets) {
  std::vector<int> assignment(dets.size(), -1);
  std::vector<char> taken(targets.size(), 0);
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].objectness > dets[b].objectness; });
  for (size_t d : order) {
    int best = -1;
    double best_distance = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < targets.size(); ++t) {
      if (taken[t] || targets[t].class_id != dets[d].class_id) continue;
      if (!contains_point(targets[t].box, dets[d].candidate)) continue;
      const double distance = norm(targets[t].box.center - dets[d].candidate);
      if (distance < best_distance) {
        best_distance = distance;
        best = static_cast<int>(t);
      }
    }
    if (best >= 0) {
      assignment[d] = best;
      taken[best] = 1;
    }
  }
  return assignment;
}

double full_set_loss(const UncertaintyModel& model,
                     const std::vector<UncertaintyTrainingSample>& samples) {
  std::vector<double> labels(samples.size());
  std::vector<double> preds(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    labels[i] = samples[i].label;
    preds[i] = model.predict(samples[i].geo_features, samples[i].dist_features);
  }
  return uncertainty_loss(labels, preds);
}

struct BiasGradient {
  SideArray grad{};
  double loss = 0.0;   // summed box losses
  long matches = 0;
};

/// Box-loss value and its gradient with respect to the per-side bias for one
/// matched (refined prediction, target) pair. The IoU term is treated as
/// constant in the bias; the side terms carry the localization gradient.
void accumulate_pair(BiasGradient& acc, const Detection& refined, const OrientedBox3& target,
                     double delta, const QualityWeights* weights) {
  const SideDistances sides = sides_from_box(refined.candidate, refined.box);
  SideArray targets;
  try {
    targets = side_targets_in_frame(refined.candidate, refined.box.yaw, target);
  } catch (const std::invalid_argument&) {
    return;
  }
  const BoxLossBreakdown breakdown =
      box_loss(sides.distance, refined.box, refined.candidate, target, delta, weights);
  acc.loss += breakdown.total;
  ++acc.matches;
  for (int s = 0; s < kSideCount; ++s) {
    const double w = weights ? weights->side_quality[s] : 1.0;
    acc.grad[s] += w * smooth_l1_grad(sides.distance[s], targets[s], delta);
  }
}

}  // namespace

void ema_update(EmaState& state) {
  if (state.teacher.size() != state.student.size()) {
    throw std::invalid_argument("EMA parameter vectors differ in length");
  }
  if (state.momentum < 0.0 || state.momentum >= 1.0) {
    throw std::invalid_argument("EMA momentum must be in [0, 1)");
  }
  const double m = state.momentum;
  for (size_t i = 0; i < state.teacher.size(); ++i) {
    state.teacher[i] = m * state.teacher[i] + (1.0 - m) * state.student[i];
  }
}

Vec3 apply(const RigidTransform& t, const Vec3& p) {
  return rotate_z(p, t.yaw) + t.translation;
}

OrientedBox3 apply(const RigidTransform& t, const OrientedBox3& box) {
  return {apply(t, box.center), box.size, normalize_angle(box.yaw + t.yaw)};
}

SceneSample apply(const RigidTransform& t, const SceneSample& scene) {
  SceneSample out = scene;
  for (GtBox& gt : out.ground_truth) gt.box = apply(t, gt.box);
  for (Vec3& p : out.seeds.points) p = apply(t, p);
  return out;
}

RigidTransform inverse(const RigidTransform& t) {
  return {-t.yaw, rotate_z(-t.translation, -t.yaw)};
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  return {normalize_angle(outer.yaw + inner.yaw),
          rotate_z(inner.translation, outer.yaw) + outer.translation};
}

RigidTransform random_transform(Rng& rng, double max_translation) {
  RigidTransform t;
  t.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
  t.translation = {rng.uniform(-max_translation, max_translation),
                   rng.uniform(-max_translation, max_translation), 0.0};
  return t;
}

std::vector<double> flatten(const StudentState& state) {
  std::vector<double> flat = state.head.parameters();
  flat.insert(flat.end(), state.side_bias.begin(), state.side_bias.end());
  return flat;
}

StudentState unflatten(const ModelShape& shape, std::span<const double> flat) {
  StudentState state;
  state.head = UncertaintyModel(shape);
  const size_t head_count = static_cast<size_t>(state.head.parameter_count());
  if (flat.size() != head_count + kSideCount) {
    throw std::invalid_argument("student parameter vector length mismatch");
  }
  state.head.set_parameters(flat.subspan(0, head_count));
  std::copy(flat.begin() + head_count, flat.end(), state.side_bias.begin());
  return state;
}

Detection refine_detection(const Detection& det, const SideArray& side_bias) {
  Detection out = det;
  SideDistances expected;
  expected.candidate = det.candidate;
  expected.yaw = det.box.yaw;
  for (int s = 0; s < kSideCount; ++s) {
    out.side_dists[s] = shift_distribution(det.side_dists[s], side_bias[s]);
    expected.distance[s] = expected_value(out.side_dists[s]);
  }
  out.box = box_from_sides(expected);
  return out;
}

std::vector<UncertaintyTrainingSample> build_uncertainty_samples(
    const std::vector<SceneSample>& scenes, const UncertaintyModel& model,
    const PretrainOptions& options) {
  Rng root(options.seed);
  std::vector<UncertaintyTrainingSample> samples;
  for (size_t i = 0; i < scenes.size(); ++i) {
    Rng scene_rng = root.fork(kStreamDataset, static_cast<uint64_t>(scenes[i].scene_id));
    std::vector<int> sources;
    const std::vector<Detection> dets =
        teacher_predict(scenes[i], options.teacher, scene_rng, &sources);
    append_samples(samples, dets, sources, scenes[i], model, options.teacher);
  }
  return samples;
}

PretrainResult run_pretrain(const std::vector<SceneSample>& labeled,
                            const PretrainOptions& options) {
  if (labeled.empty()) throw std::invalid_argument("pretraining requires labeled scenes");
  if (options.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (options.epochs < 0) throw std::invalid_argument("epochs must be >= 0");

  Rng root(options.seed);
  Rng init_rng = root.fork(kStreamInit);
  PretrainResult result;
  result.model = UncertaintyModel::random_init(options.shape, init_rng);
  if (options.epochs == 0) return result;

  const std::vector<UncertaintyTrainingSample> samples =
      build_uncertainty_samples(labeled, result.model, options);
  if (samples.empty()) {
    throw std::runtime_error("pretraining produced no matched training samples");
  }
  result.report.sample_count = static_cast<int>(samples.size());

  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<UncertaintyTrainingSample> batch;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double epoch_loss = full_set_loss(result.model, samples);
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("pretraining diverged at epoch " + std::to_string(epoch));
    }
    result.report.epoch_losses.push_back(epoch_loss);

    Rng shuffle_rng = root.fork(kStreamShuffle, static_cast<uint64_t>(epoch));
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }
    for (size_t start = 0; start < order.size(); start += options.batch_size) {
      const size_t end = std::min(order.size(), start + options.batch_size);
      batch.clear();
      for (size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      train_step(result.model, batch, options.learning_rate);
    }
  }
  return result;
}

std::vector<ScenePredictions> evaluate_detector(const std::vector<SceneSample>& scenes,
                                                const StudentState& student,
                                                const SslOptions& options) {
  Rng root(options.seed);
  TeacherOptions pass = options.teacher;
  pass.noise = options.student_noise;
  pass.oracle_uncertainty = true;
  pass.model = nullptr;

  std::vector<ScenePredictions> out;
  out.reserve(scenes.size());
  for (const SceneSample& scene : scenes) {
    Rng rng = root.fork(kStreamEval, static_cast<uint64_t>(scene.scene_id));
    const std::vector<Detection> raw = teacher_predict(scene, pass, rng);
    ScenePredictions sp;
    sp.scene_id = scene.scene_id;
    for (const Detection& det : raw) {
      const Detection refined = refine_detection(det, student.side_bias);
      const double cls = refined.class_scores[refined.class_id];
      sp.preds.push_back({refined.box, refined.class_id, refined.objectness * cls});
    }
    out.push_back(std::move(sp));
  }
  return out;
}

SslResult run_ssl(const std::vector<SceneSample>& labeled,
                  const std::vector<SceneSample>& unlabeled,
                  const UncertaintyModel& pretrained, const SslOptions& options,
                  const std::vector<SceneSample>* eval_scenes) {
  if (labeled.empty()) throw std::invalid_argument("ssl stage requires labeled scenes");
  if (options.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (options.labeled_per_iter < 1) throw std::invalid_argument("labeled_per_iter must be >= 1");
  if (options.unlabeled_per_iter < 1) {
    throw std::invalid_argument("unlabeled_per_iter must be >= 1");
  }
  validate(options.loss);

  Rng root(options.seed);

  SslResult result;
  result.student = {pretrained, SideArray{}};
  result.teacher = result.student;

  CategoryThresholdState state(options.teacher.num_classes);

  // raw-pass uncertainties are recomputed after refinement (EMA head or
  // oracle), so both synthetic passes run in cheap oracle mode
  TeacherOptions teacher_pass = options.teacher;
  teacher_pass.oracle_uncertainty = true;
  teacher_pass.model = nullptr;
  TeacherOptions student_pass = options.teacher;
  student_pass.noise = options.student_noise;
  student_pass.oracle_uncertainty = true;
  student_pass.model = nullptr;

  // checkpoint-window accumulators
  double window_sup_loss = 0.0, window_unsup_loss = 0.0;
  long window_sup_terms = 0, window_unsup_terms = 0;
  long window_pseudo = 0;
  double window_quality = 0.0;
  double window_weighted_err = 0.0, window_weight = 0.0, window_err = 0.0;
  long window_sides = 0;

  auto emit_checkpoint = [&](int iteration) {
    SslCheckpointRow row;
    row.iteration = iteration;
    row.supervised_loss = window_sup_terms > 0 ? window_sup_loss / window_sup_terms : 0.0;
    row.unsupervised_loss = window_unsup_terms > 0 ? window_unsup_loss / window_unsup_terms : 0.0;
    row.pseudo_label_count = window_pseudo;
    row.mean_pseudo_quality = window_pseudo > 0 ? window_quality / window_pseudo : 0.0;
    row.weighted_side_error = window_weight > 0.0 ? window_weighted_err / window_weight : 0.0;
    row.unweighted_side_error = window_sides > 0 ? window_err / window_sides : 0.0;
    if (eval_scenes != nullptr && !eval_scenes->empty()) {
      const auto preds = evaluate_detector(*eval_scenes, result.student, options);
      std::vector<SceneGroundTruth> gts;
      gts.reserve(eval_scenes->size());
      for (const SceneSample& s : *eval_scenes) gts.push_back({s.scene_id, s.ground_truth});
      const ApResult ap = average_precision(preds, gts, options.eval_iou_thresholds,
                                            options.teacher.num_classes);
      row.mean_ap = ap.mean_ap;
    }
    result.rows.push_back(std::move(row));
    window_sup_loss = window_unsup_loss = 0.0;
    window_sup_terms = window_unsup_terms = 0;
    window_pseudo = 0;
    window_quality = 0.0;
    window_weighted_err = window_weight = window_err = 0.0;
    window_sides = 0;
  };

  for (int iter = 0; iter < options.iterations; ++iter) {
    if (options.counter_reset_interval > 0 && iter > 0 &&
        iter % options.counter_reset_interval == 0) {
      state.reset_counters();
    }

    BiasGradient sup_grad, unsup_grad;
    std::vector<UncertaintyTrainingSample> head_batch;

    // supervised pass over labeled scenes
    Rng sample_l = root.fork(kStreamSampleLabeled, static_cast<uint64_t>(iter));
    for (int j = 0; j < options.labeled_per_iter; ++j) {
      const SceneSample& scene = labeled[sample_l.uniform_int(labeled.size())];
      Rng aug_rng = root.fork(kStreamAugLabeled, static_cast<uint64_t>(iter), j);
      const RigidTransform aug = random_transform(aug_rng, options.aug_max_translation);
      const SceneSample aug_scene = apply(aug, scene);

      Rng pass_rng = root.fork(kStreamLabeledPass, static_cast<uint64_t>(iter), j);
      std::vector<int> sources;
      const std::vector<Detection> raw = teacher_predict(aug_scene, student_pass, pass_rng, &sources);

      std::vector<Detection> refined;
      refined.reserve(raw.size());
      for (const Detection& det : raw) refined.push_back(refine_detection(det, result.student.side_bias));

      for (size_t d = 0; d < refined.size(); ++d) {
        const int g = sources[d];
        if (g < 0) continue;
        accumulate_pair(sup_grad, refined[d], aug_scene.ground_truth[g].box,
                        options.loss.smooth_l1_delta, nullptr);
      }
      append_samples(head_batch, refined, sources, aug_scene, result.student.head, student_pass);
    }

    // unsupervised pass over teacher pseudo-labels
    if (!unlabeled.empty()) {
      Rng sample_u = root.fork(kStreamSampleUnlabeled, static_cast<uint64_t>(iter));
      for (int j = 0; j < options.unlabeled_per_iter; ++j) {
        const SceneSample& scene = unlabeled[sample_u.uniform_int(unlabeled.size())];
        Rng aug_t_rng = root.fork(kStreamAugTeacher, static_cast<uint64_t>(iter), j);
        Rng aug_s_rng = root.fork(kStreamAugStudent, static_cast<uint64_t>(iter), j);
        const RigidTransform aug_t = random_transform(aug_t_rng, options.aug_max_translation);
        const RigidTransform aug_s = random_transform(aug_s_rng, options.aug_max_translation);
        const SceneSample scene_t = apply(aug_t, scene);
        const SceneSample scene_s = apply(aug_s, scene);

        Rng teacher_rng = root.fork(kStreamTeacherPass, static_cast<uint64_t>(iter), j);
        const std::vector<Detection> teacher_raw =
            teacher_predict(scene_t, teacher_pass, teacher_rng);
        std::vector<Detection> teacher_refined;
        teacher_refined.reserve(teacher_raw.size());
        for (const Detection& det : teacher_raw) {
          Detection refined = refine_detection(det, result.teacher.side_bias);
          // quality comes from the EMA head on the refined prediction, or
          // from ground truth in oracle mode
          if (options.oracle_pseudo_uncertainty) {
            refined.side_uncertainty =
                oracle_side_uncertainties(refined, scene_t, options.teacher.label_scale);
          } else {
            for (Side side : kAllSides) {
              const int s = side_index(side);
              const double u = result.teacher.head.predict_side(
                  refined.box, side, refined.side_dists[s], scene_t.seeds,
                  options.teacher.side_point_grid, options.teacher.k_nn, options.teacher.top_k);
              refined.side_uncertainty[s] = std::clamp(u, kUncertaintyEps, 1.0 - kUncertaintyEps);
            }
          }
          teacher_refined.push_back(std::move(refined));
        }

        std::vector<PseudoLabel> pls = select_pseudo_labels(teacher_refined, state,
                                                            options.selection);

        // accepted-supervision quality statistics, in the teacher frame
        {
          std::vector<ScenePseudoLabels> spl{{scene_t.scene_id, pls}};
          std::vector<SceneGroundTruth> sgt{{scene_t.scene_id, scene_t.ground_truth}};
          const SideQualityReport stats =
              side_error_stats(spl, sgt, options.match_iou, 0.1, options.teacher.num_classes);
          window_weighted_err += stats.weighted_mean_side_error * stats.matched_pseudo_labels;
          window_weight += stats.matched_pseudo_labels;
          window_err += stats.unweighted_mean_side_error * stats.matched_pseudo_labels;
          window_sides += stats.matched_pseudo_labels;
        }
        window_pseudo += static_cast<long>(pls.size());
        for (const PseudoLabel& pl : pls) window_quality += pl.global_quality;

        // pseudo-labels move into the student's augmentation frame
        const RigidTransform to_student = compose(aug_s, inverse(aug_t));
        for (PseudoLabel& pl : pls) pl.box = apply(to_student, pl.box);

        Rng student_rng = root.fork(kStreamStudentPass, static_cast<uint64_t>(iter), j);
        const std::vector<Detection> student_raw =
            teacher_predict(scene_s, student_pass, student_rng);
        std::vector<Detection> student_refined;
        student_refined.reserve(student_raw.size());
        for (const Detection& det : student_raw) {
          student_refined.push_back(refine_detection(det, result.student.side_bias));
        }

        std::vector<GtBox> pl_targets;
        pl_targets.reserve(pls.size());
        for (const PseudoLabel& pl : pls) pl_targets.push_back({pl.box, pl.class_id});
        const std::vector<int> matches = match_candidates_to_targets(student_refined, pl_targets);
        for (size_t d = 0; d < student_refined.size(); ++d) {
          const int g = matches[d];
          if (g < 0) continue;
          QualityWeights weights;
          if (options.side_aware_weighting) {
            weights.side_quality = pls[g].side_quality;
            weights.global_quality = pls[g].global_quality;
          } else {
            weights.side_quality.fill(1.0);
            weights.global_quality = 1.0;
          }
          accumulate_pair(unsup_grad, student_refined[d], pls[g].box,
                          options.loss.smooth_l1_delta, &weights);
        }
      }
    }

    // gradient step on the side bias: mean over matched pairs per branch,
    // combined as supervised + beta * unsupervised
    SideArray step{};
    if (sup_grad.matches > 0) {
      for (int s = 0; s < kSideCount; ++s) {
        step[s] += sup_grad.grad[s] / static_cast<double>(sup_grad.matches);
      }
      window_sup_loss += sup_grad.loss / static_cast<double>(sup_grad.matches);
      ++window_sup_terms;
    }
    if (unsup_grad.matches > 0) {
      for (int s = 0; s < kSideCount; ++s) {
        step[s] += options.loss.beta * unsup_grad.grad[s] / static_cast<double>(unsup_grad.matches);
      }
      window_unsup_loss += unsup_grad.loss / static_cast<double>(unsup_grad.matches);
      ++window_unsup_terms;
    }
    for (int s = 0; s < kSideCount; ++s) {
      const double update = options.bias_learning_rate * step[s];
      if (!std::isfinite(update)) {
        throw std::runtime_error("ssl stage diverged: non-finite bias update at iteration " +
                                 std::to_string(iter));
      }
      result.student.side_bias[s] -= update;
    }
    if (!head_batch.empty() && options.head_learning_rate > 0.0) {
      train_step(result.student.head, head_batch, options.head_learning_rate);
    }

    EmaState ema{flatten(result.teacher), flatten(result.student), options.ema_momentum};
    ema_update(ema);
    result.teacher = unflatten(result.student.head.shape(), ema.teacher);

    if (options.checkpoint_interval > 0 && ((iter + 1) % options.checkpoint_interval == 0 ||
                                            iter + 1 == options.iterations)) {
      emit_checkpoint(iter + 1);
    }
  }
  if (result.rows.empty() && options.iterations == 0) emit_checkpoint(0);
  return result;
}

}  // namespace sideaware
