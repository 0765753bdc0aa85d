// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-side localization uncertainty: sample points on a box face, pull seed
// features onto them by inverse-distance k-NN interpolation, pool them with a
// small permutation-invariant network, and feed the pooled geometry features
// together with the side's distribution features through a two-layer head
// that emits an uncertainty in (0, 1).
//
// The pooled feature extractor (w1, b1) acts as a fixed random projection:
// training updates only the head layers, and the gradient entries for the
// extractor are identically zero.
#ifndef SIDEAWARE_UNCERTAINTY_HPP_
#define SIDEAWARE_UNCERTAINTY_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sideaware/distribution.hpp"
#include "sideaware/geometry.hpp"

namespace sideaware {

struct SeedCloud {
  std::vector<Vec3> points;
  std::vector<std::vector<double>> features;  // one vector of seed_dim per point
};

struct SidePointSet {
  Side side = Side::kTop;
  std::vector<Vec3> points;  // grid * grid points on the face plane
};

/// grid x grid cell-center lattice on the face of `box` for `side`,
/// transformed to world coordinates. Every point lies on the face plane.
SidePointSet generate_side_points(const OrientedBox3& box, Side side, int grid);

/// Inverse-distance-weighted feature interpolation from the k_nn nearest
/// seeds onto each side point. Weights are (1/(d+eps)) normalized to sum to
/// one, eps = 1e-8. Throws std::invalid_argument on an empty seed cloud or
/// k_nn out of range.
std::vector<std::vector<double>> interpolate_features(const SidePointSet& side_points,
                                                      const SeedCloud& seeds, int k_nn);

/// Per-point pooling inputs for one side: the interpolated seed features of
/// each side point with the point's box-frame coordinates appended. The
/// coordinates carry the side's identity and extent into the pooled
/// features (a front point sits at local +x, a top point at local +z, and
/// so on), so the input width is seed feature dim + 3.
std::vector<std::vector<double>> assemble_side_inputs(
    const OrientedBox3& box, const SidePointSet& side_points,
    const std::vector<std::vector<double>>& interpolated);

struct ModelShape {
  int seed_dim = 4;    // per-seed feature channels
  int point_dim = 32;  // pooled geometry feature width
  int dist_dim = 34;   // distribution feature width (bins + 2)
  int hidden_dim = 64;
};

/// Parameters of the per-point extractor and the uncertainty head. Layout of
/// the flattened parameter vector (and of checkpoints): w1 row-major
/// (point_dim x seed_dim), b1, w2 row-major (hidden_dim x (point_dim +
/// dist_dim)), b2, w3 (hidden_dim), b3. tanh nonlinearities, sigmoid output.
class UncertaintyModel {
 public:
  UncertaintyModel() = default;
  explicit UncertaintyModel(const ModelShape& shape);

  static UncertaintyModel random_init(const ModelShape& shape, Rng& rng);

  const ModelShape& shape() const { return shape_; }
  int parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  /// Per-point affine + tanh, then coordinate-wise max over points.
  /// Permutation invariant by construction.
  std::vector<double> pool_geometry_features(
      const std::vector<std::vector<double>>& per_point_features) const;

  /// Head forward pass on the concatenation of pooled geometry features and
  /// distribution features. Output strictly inside (0, 1).
  double predict(std::span<const double> geo_features, std::span<const double> dist_features) const;

  /// Pooled geometry features for one side of one box against a seed cloud
  /// (side points -> interpolation -> input assembly -> pooling).
  std::vector<double> pooled_side_features(const OrientedBox3& box, Side side,
                                           const SeedCloud& seeds, int grid, int k_nn) const;

  /// Full pipeline for one side of one box against a seed cloud.
  double predict_side(const OrientedBox3& box, Side side, const SideDistribution& dist,
                      const SeedCloud& seeds, int grid, int k_nn, int top_k) const;

  // Exposed for gradient computation and EMA blending.
  std::vector<double> w1, b1, w2, b2, w3;
  double b3 = 0.0;

 private:
  ModelShape shape_;
};

struct UncertaintyTrainingSample {
  std::vector<double> geo_features;   // point_dim
  std::vector<double> dist_features;  // dist_dim
  double label = 0.0;                 // in [0, 1]
};

/// Clipped scaled absolute deviation: min(label_scale * |target - predicted|, 1).
double uncertainty_label(double target_side, double predicted_side, double label_scale);

/// Mean squared error between labels and predictions. Throws on empty or
/// mismatched inputs.
double uncertainty_loss(std::span<const double> labels, std::span<const double> predictions);

/// Batch loss and the gradient for every model parameter, in parameters()
/// order. Extractor entries are zero (the head trains on fixed features).
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossAndGradient loss_and_gradient(const UncertaintyModel& model,
                                  std::span<const UncertaintyTrainingSample> batch);

/// One plain gradient-descent step. Returns the pre-update batch loss.
/// Throws std::runtime_error with diagnostics on a non-finite gradient.
double train_step(UncertaintyModel& model, std::span<const UncertaintyTrainingSample> batch,
                  double learning_rate);

/// Checkpoint layout (little-endian binary): magic "SAWMODL1", five int32
/// shape fields (seed_dim, point_dim, dist_dim, hidden_dim, extra_count),
/// then the flattened parameters and `extra_count` trailing doubles, each
/// double stored as its IEEE-754 bit pattern. Round-trips bit-exactly.
void save_checkpoint(std::ostream& out, const UncertaintyModel& model,
                     std::span<const double> extra = {});
struct Checkpoint {
  UncertaintyModel model;
  std::vector<double> extra;
};
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const UncertaintyModel& model,
                          std::span<const double> extra = {});
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace sideaware

#endif  // SIDEAWARE_UNCERTAINTY_HPP_
