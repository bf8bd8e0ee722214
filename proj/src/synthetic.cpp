// Copyright 2026 The hbpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hbpe/error.hpp"
#include "hbpe/experiment.hpp"

namespace hbpe {

namespace {

constexpr double kTurnSmoothingSigma = 3.0;  // samples
constexpr double kTurnMinDeg = 45.0;
constexpr double kTurnMaxDeg = 135.0;

std::vector<double> gaussian_taps(double sigma) {
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
  for (int i = -half; i <= half; ++i) {
    taps[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * i * i / (sigma * sigma));
  }
  return taps;
}

// Normalized moving Gaussian average with edge replication.
Eigen::VectorXd smooth(const Eigen::VectorXd& x, double sigma) {
  const std::vector<double> taps = gaussian_taps(sigma);
  const int half = static_cast<int>(taps.size() / 2);
  double total = 0.0;
  for (double w : taps) total += w;
  const Eigen::Index n = x.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int i = -half; i <= half; ++i) {
      const Eigen::Index s = std::clamp<Eigen::Index>(t + i, 0, n - 1);
      acc += taps[static_cast<std::size_t>(i + half)] * x(s);
    }
    out(t) = acc / total;
  }
  return out;
}

// Stationary unit-variance process with squared-exponential correlation
// exp(-d^2 / (2 l^2)): white noise filtered by a Gaussian of width l / sqrt(2).
Eigen::VectorXd smooth_unit_process(int length, double length_scale, std::mt19937_64& rng) {
  const std::vector<double> taps = gaussian_taps(length_scale / std::sqrt(2.0));
  const int half = static_cast<int>(taps.size() / 2);
  double energy = 0.0;
  for (double w : taps) energy += w * w;
  const double norm = 1.0 / std::sqrt(energy);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(static_cast<std::size_t>(length + 2 * half));
  for (double& v : noise) v = gauss(rng);
  Eigen::VectorXd out(length);
  for (int t = 0; t < length; ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) acc += taps[i] * noise[static_cast<std::size_t>(t) + i];
    out(t) = acc * norm;
  }
  return out;
}

Eigen::MatrixXd one_hot(const ClassVector& labels, int classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(classes, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t t = 0; t < labels.size(); ++t) y(labels[t], static_cast<Eigen::Index>(t)) = 1.0;
  return y;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

Eigen::MatrixXd linear_features(const ClassVector& labels, int classes, int dims, int rank,
                                double noise, std::mt19937_64& rng) {
  const Eigen::MatrixXd left = gaussian_matrix(dims, rank, rng);
  const Eigen::MatrixXd right = gaussian_matrix(rank, classes, rng);
  Eigen::MatrixXd x = (left * right / std::sqrt(static_cast<double>(rank))) * one_hot(labels, classes);
  if (noise > 0.0) x += noise * gaussian_matrix(dims, x.cols(), rng);
  return x;
}

ClassVector quantize(const Eigen::VectorXd& angles, int classes) {
  ClassVector out(static_cast<std::size_t>(angles.size()));
  for (Eigen::Index t = 0; t < angles.size(); ++t) {
    out[static_cast<std::size_t>(t)] = angle_to_class(angles(t), classes).index;
  }
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (length < 2) throw InvalidInput("synthetic length must be >= 2");
  if (classes < 2) throw InvalidInput("synthetic classes must be >= 2");
  if (head_features < 1 || body_features < 1) throw InvalidInput("feature dimensions must be >= 1");
  if (turn_events < 0) throw InvalidInput("turn_events must be >= 0");
  if (!(gp_length_scale > 0.0)) throw InvalidInput("gp_length_scale must be > 0");
  if (feature_rank < 1 || feature_rank > std::min({classes, head_features, body_features})) {
    throw InvalidInput("feature_rank must lie in [1, min(c, d_h, d_b)]");
  }
  if (!(feature_noise >= 0.0)) throw InvalidInput("feature_noise must be >= 0");
  if (!std::isfinite(head_body_offset_deg) || head_body_offset_deg < 0.0) {
    throw InvalidInput("head_body_offset_deg must be finite and >= 0");
  }
}

SyntheticTrajectory generate_trajectory(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double start = 360.0 * unit(rng);
  std::vector<int> turns(static_cast<std::size_t>(spec.turn_events));
  std::uniform_int_distribution<int> when(1, spec.length - 1);
  for (int& t : turns) t = when(rng);
  std::sort(turns.begin(), turns.end());

  Eigen::VectorXd raw = Eigen::VectorXd::Constant(spec.length, start);
  for (int t : turns) {
    const double magnitude = kTurnMinDeg + (kTurnMaxDeg - kTurnMinDeg) * unit(rng);
    const double delta = unit(rng) < 0.5 ? -magnitude : magnitude;
    raw.tail(spec.length - t).array() += delta;
  }

  SyntheticTrajectory out;
  if (spec.turn_events == 0) {
    out.body_deg = raw;
    out.head_deg = raw;
    return out;
  }
  out.body_deg = smooth(raw, kTurnSmoothingSigma);
  const Eigen::VectorXd offset = smooth_unit_process(spec.length, spec.gp_length_scale, rng);
  out.head_deg = out.body_deg + spec.head_body_offset_deg * offset;
  return out;
}

PersonDataset generate_synthetic(const SyntheticSpec& spec, std::string person_id) {
  const SyntheticTrajectory traj = generate_trajectory(spec);
  // Features draw from a separate stream so that label trajectories do not
  // depend on feature settings.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);

  PersonDataset person;
  person.person_id = std::move(person_id);
  person.classes = spec.classes;
  person.head_truth = quantize(traj.head_deg, spec.classes);
  person.body_truth = quantize(traj.body_deg, spec.classes);
  person.head_features = linear_features(person.head_truth, spec.classes, spec.head_features,
                                         spec.feature_rank, spec.feature_noise, rng);
  person.body_features = linear_features(person.body_truth, spec.classes, spec.body_features,
                                         spec.feature_rank, spec.feature_noise, rng);
  return person;
}

}  // namespace hbpe
