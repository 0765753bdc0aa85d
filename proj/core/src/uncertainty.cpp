// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include "sideaware/uncertainty.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sideaware {

namespace {

constexpr double kInterpEps = 1e-8;
constexpr char kCheckpointMagic[8] = {'S', 'A', 'W', 'M', 'O', 'D', 'L', '1'};

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

SidePointSet generate_side_points(const OrientedBox3& box, Side side, int grid) {
  if (grid < 1) throw std::invalid_argument("side point grid must be >= 1");
  SidePointSet set;
  set.side = side;
  set.points.reserve(static_cast<size_t>(grid) * grid);

  // local-frame face: fixed coordinate along the face normal, a grid of cell
  // centers across the two in-plane extents
  double nx = 0, ny = 0, nz = 0;
  int axis = 0;
  switch (side) {
    case Side::kFront: nx = 0.5 * box.size.x; axis = 0; break;
    case Side::kBack: nx = -0.5 * box.size.x; axis = 0; break;
    case Side::kLeft: ny = 0.5 * box.size.y; axis = 1; break;
    case Side::kRight: ny = -0.5 * box.size.y; axis = 1; break;
    case Side::kTop: nz = 0.5 * box.size.z; axis = 2; break;
    case Side::kDown: nz = -0.5 * box.size.z; axis = 2; break;
  }
  const double ext_u = (axis == 0) ? box.size.y : box.size.x;
  const double ext_v = (axis == 2) ? box.size.y : box.size.z;
  for (int i = 0; i < grid; ++i) {
    const double u = ((static_cast<double>(i) + 0.5) / grid - 0.5) * ext_u;
    for (int j = 0; j < grid; ++j) {
      const double v = ((static_cast<double>(j) + 0.5) / grid - 0.5) * ext_v;
      Vec3 local;
      if (axis == 0) local = {nx, u, v};
      else if (axis == 1) local = {u, ny, v};
      else local = {u, v, nz};
      set.points.push_back(box.center + rotate_z(local, box.yaw));
    }
  }
  return set;
}

std::vector<std::vector<double>> interpolate_features(const SidePointSet& side_points,
                                                      const SeedCloud& seeds, int k_nn) {
  if (seeds.points.empty()) throw std::invalid_argument("seed cloud is empty");
  if (seeds.points.size() != seeds.features.size()) {
    throw std::invalid_argument("seed cloud points/features length mismatch");
  }
  if (k_nn < 1 || static_cast<size_t>(k_nn) > seeds.points.size()) {
    throw std::invalid_argument("k_nn must be in [1, seed count]");
  }

  const size_t feature_dim = seeds.features.front().size();
  std::vector<std::vector<double>> out;
  out.reserve(side_points.points.size());
  std::vector<std::pair<double, size_t>> by_distance(seeds.points.size());

  for (const Vec3& p : side_points.points) {
    for (size_t s = 0; s < seeds.points.size(); ++s) {
      by_distance[s] = {norm(seeds.points[s] - p), s};
    }
    std::partial_sort(by_distance.begin(), by_distance.begin() + k_nn, by_distance.end());

    double weight_sum = 0.0;
    for (int k = 0; k < k_nn; ++k) weight_sum += 1.0 / (by_distance[k].first + kInterpEps);

    std::vector<double> feature(feature_dim, 0.0);
    for (int k = 0; k < k_nn; ++k) {
      const double w = (1.0 / (by_distance[k].first + kInterpEps)) / weight_sum;
      const std::vector<double>& f = seeds.features[by_distance[k].second];
      for (size_t c = 0; c < feature_dim; ++c) feature[c] += w * f[c];
    }
    out.push_back(std::move(feature));
  }
  return out;
}

UncertaintyModel::UncertaintyModel(const ModelShape& shape) : shape_(shape) {
  if (shape.seed_dim < 1 || shape.point_dim < 1 || shape.dist_dim < 1 || shape.hidden_dim < 1) {
    throw std::invalid_argument("model shape dimensions must be positive");
  }
  w1.assign(static_cast<size_t>(shape.point_dim) * shape.seed_dim, 0.0);
  b1.assign(shape.point_dim, 0.0);
  w2.assign(static_cast<size_t>(shape.hidden_dim) * (shape.point_dim + shape.dist_dim), 0.0);
  b2.assign(shape.hidden_dim, 0.0);
  w3.assign(shape.hidden_dim, 0.0);
  b3 = 0.0;
}

UncertaintyModel UncertaintyModel::random_init(const ModelShape& shape, Rng& rng) {
  UncertaintyModel m(shape);
  auto glorot = [&rng](std::vector<double>& w, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-bound, bound);
  };
  glorot(m.w1, shape.seed_dim, shape.point_dim);
  glorot(m.w2, shape.point_dim + shape.dist_dim, shape.hidden_dim);
  glorot(m.w3, shape.hidden_dim, 1);
  return m;
}

int UncertaintyModel::parameter_count() const {
  return static_cast<int>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1);
}

std::vector<double> UncertaintyModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.insert(flat.end(), b2.begin(), b2.end());
  flat.insert(flat.end(), w3.begin(), w3.end());
  flat.push_back(b3);
  return flat;
}

void UncertaintyModel::set_parameters(std::span<const double> flat) {
  if (static_cast<int>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  size_t off = 0;
  auto take = [&](std::vector<double>& dst) {
    std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
    off += dst.size();
  };
  take(w1);
  take(b1);
  take(w2);
  take(b2);
  take(w3);
  b3 = flat[off];
}

std::vector<double> UncertaintyModel::pool_geometry_features(
    const std::vector<std::vector<double>>& per_point_features) const {
  if (per_point_features.empty()) throw std::invalid_argument("cannot pool an empty point set");
  std::vector<double> pooled(shape_.point_dim, -std::numeric_limits<double>::infinity());
  for (const std::vector<double>& f : per_point_features) {
    if (static_cast<int>(f.size()) != shape_.seed_dim) {
      throw std::invalid_argument("per-point feature width does not match model seed_dim");
    }
    for (int r = 0; r < shape_.point_dim; ++r) {
      double acc = b1[r];
      const double* row = &w1[static_cast<size_t>(r) * shape_.seed_dim];
      for (int c = 0; c < shape_.seed_dim; ++c) acc += row[c] * f[c];
      pooled[r] = std::max(pooled[r], std::tanh(acc));
    }
  }
  return pooled;
}

double UncertaintyModel::predict(std::span<const double> geo_features,
                                 std::span<const double> dist_features) const {
  if (static_cast<int>(geo_features.size()) != shape_.point_dim ||
      static_cast<int>(dist_features.size()) != shape_.dist_dim) {
    throw std::invalid_argument("feature widths do not match model shape");
  }
  const int in_dim = shape_.point_dim + shape_.dist_dim;
  double out = b3;
  for (int r = 0; r < shape_.hidden_dim; ++r) {
    double acc = b2[r];
    const double* row = &w2[static_cast<size_t>(r) * in_dim];
    for (int c = 0; c < shape_.point_dim; ++c) acc += row[c] * geo_features[c];
    for (int c = 0; c < shape_.dist_dim; ++c) acc += row[shape_.point_dim + c] * dist_features[c];
    out += w3[r] * std::tanh(acc);
  }
  return sigmoid(out);
}

std::vector<std::vector<double>> assemble_side_inputs(
    const OrientedBox3& box, const SidePointSet& side_points,
    const std::vector<std::vector<double>>& interpolated) {
  if (side_points.points.size() != interpolated.size()) {
    throw std::invalid_argument("side points / interpolated features length mismatch");
  }
  std::vector<std::vector<double>> inputs;
  inputs.reserve(interpolated.size());
  for (size_t i = 0; i < interpolated.size(); ++i) {
    std::vector<double> input = interpolated[i];
    const Vec3 local = rotate_z(side_points.points[i] - box.center, -box.yaw);
    input.push_back(local.x);
    input.push_back(local.y);
    input.push_back(local.z);
    inputs.push_back(std::move(input));
  }
  return inputs;
}

std::vector<double> UncertaintyModel::pooled_side_features(const OrientedBox3& box, Side side,
                                                           const SeedCloud& seeds, int grid,
                                                           int k_nn) const {
  const SidePointSet points = generate_side_points(box, side, grid);
  const auto interpolated = interpolate_features(points, seeds, k_nn);
  return pool_geometry_features(assemble_side_inputs(box, points, interpolated));
}

double UncertaintyModel::predict_side(const OrientedBox3& box, Side side,
                                      const SideDistribution& dist, const SeedCloud& seeds,
                                      int grid, int k_nn, int top_k) const {
  const std::vector<double> geo = pooled_side_features(box, side, seeds, grid, k_nn);
  const std::vector<double> dist_features = distribution_features(dist, top_k);
  return predict(geo, dist_features);
}

double uncertainty_label(double target_side, double predicted_side, double label_scale) {
  if (!std::isfinite(target_side) || !std::isfinite(predicted_side)) {
    throw std::invalid_argument("uncertainty label inputs must be finite");
  }
  if (label_scale <= 0.0) throw std::invalid_argument("label scale must be positive");
  return std::min(label_scale * std::abs(target_side - predicted_side), 1.0);
}

double uncertainty_loss(std::span<const double> labels, std::span<const double> predictions) {
  if (labels.empty()) throw std::invalid_argument("uncertainty loss over an empty set");
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("labels/predictions length mismatch");
  }
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double e = labels[i] - predictions[i];
    total += e * e;
  }
  return total / static_cast<double>(labels.size());
}

LossAndGradient loss_and_gradient(const UncertaintyModel& model,
                                  std::span<const UncertaintyTrainingSample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const ModelShape& shape = model.shape();
  const int in_dim = shape.point_dim + shape.dist_dim;
  const size_t head_w2 = static_cast<size_t>(shape.hidden_dim) * in_dim;
  const size_t off_w2 = model.w1.size() + model.b1.size();
  const size_t off_b2 = off_w2 + head_w2;
  const size_t off_w3 = off_b2 + shape.hidden_dim;
  const size_t off_b3 = off_w3 + shape.hidden_dim;

  LossAndGradient result;
  result.gradient.assign(model.parameter_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  std::vector<double> input(in_dim);
  std::vector<double> hidden(shape.hidden_dim);
  for (const UncertaintyTrainingSample& sample : batch) {
    if (static_cast<int>(sample.geo_features.size()) != shape.point_dim ||
        static_cast<int>(sample.dist_features.size()) != shape.dist_dim) {
      throw std::invalid_argument("training sample feature widths do not match model shape");
    }
    std::copy(sample.geo_features.begin(), sample.geo_features.end(), input.begin());
    std::copy(sample.dist_features.begin(), sample.dist_features.end(),
              input.begin() + shape.point_dim);

    double out = model.b3;
    for (int r = 0; r < shape.hidden_dim; ++r) {
      double acc = model.b2[r];
      const double* row = &model.w2[static_cast<size_t>(r) * in_dim];
      for (int c = 0; c < in_dim; ++c) acc += row[c] * input[c];
      hidden[r] = std::tanh(acc);
      out += model.w3[r] * hidden[r];
    }
    const double u = sigmoid(out);
    const double err = u - sample.label;
    result.loss += err * err * inv_n;

    // d(loss_i)/d(pre-sigmoid) for the mean-of-squares batch loss
    const double dout = 2.0 * err * u * (1.0 - u) * inv_n;
    result.gradient[off_b3] += dout;
    for (int r = 0; r < shape.hidden_dim; ++r) {
      result.gradient[off_w3 + r] += dout * hidden[r];
      const double dpre = dout * model.w3[r] * (1.0 - hidden[r] * hidden[r]);
      result.gradient[off_b2 + r] += dpre;
      double* grow = &result.gradient[off_w2 + static_cast<size_t>(r) * in_dim];
      for (int c = 0; c < in_dim; ++c) grow[c] += dpre * input[c];
    }
  }
  return result;
}

double train_step(UncertaintyModel& model, std::span<const UncertaintyTrainingSample> batch,
                  double learning_rate) {
  LossAndGradient lg = loss_and_gradient(model, batch);
  for (size_t i = 0; i < lg.gradient.size(); ++i) {
    if (!std::isfinite(lg.gradient[i])) {
      throw std::runtime_error("non-finite gradient at parameter index " + std::to_string(i) +
                               " (batch loss " + std::to_string(lg.loss) + ")");
    }
  }
  if (learning_rate != 0.0) {
    std::vector<double> params = model.parameters();
    for (size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * lg.gradient[i];
    model.set_parameters(params);
  }
  return lg.loss;
}

void save_checkpoint(std::ostream& out, const UncertaintyModel& model,
                     std::span<const double> extra) {
  out.write(kCheckpointMagic, 8);
  const ModelShape& s = model.shape();
  write_u32(out, static_cast<uint32_t>(s.seed_dim));
  write_u32(out, static_cast<uint32_t>(s.point_dim));
  write_u32(out, static_cast<uint32_t>(s.dist_dim));
  write_u32(out, static_cast<uint32_t>(s.hidden_dim));
  write_u32(out, static_cast<uint32_t>(extra.size()));
  for (double v : model.parameters()) write_f64(out, v);
  for (double v : extra) write_f64(out, v);
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw std::runtime_error("bad checkpoint: magic mismatch");
  }
  ModelShape shape;
  shape.seed_dim = static_cast<int>(read_u32(in));
  shape.point_dim = static_cast<int>(read_u32(in));
  shape.dist_dim = static_cast<int>(read_u32(in));
  shape.hidden_dim = static_cast<int>(read_u32(in));
  const uint32_t extra_count = read_u32(in);
  if (!in) throw std::runtime_error("bad checkpoint: truncated header");

  Checkpoint ckpt;
  ckpt.model = UncertaintyModel(shape);
  std::vector<double> params(ckpt.model.parameter_count());
  for (double& v : params) v = read_f64(in);
  ckpt.extra.resize(extra_count);
  for (double& v : ckpt.extra) v = read_f64(in);
  if (!in) throw std::runtime_error("bad checkpoint: truncated parameters");
  ckpt.model.set_parameters(params);
  return ckpt;
}

void save_checkpoint_file(const std::string& path, const UncertaintyModel& model,
                          std::span<const double> extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  save_checkpoint(out, model, extra);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return load_checkpoint(in);
}

}  // namespace sideaware
