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

// Shared helpers for the unit and acceptance tests: seeded random data and
// independent dense reference solutions.

#ifndef HBPE_TESTS_SUPPORT_HPP
#define HBPE_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "hbpe/matrix_completion.hpp"

namespace hbpe::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// tau |X|_* + 1/2 |X - A|_F^2
inline double prox_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a, double tau) {
  return tau * nuclear_norm(x) + 0.5 * (x - a).squaredNorm();
}

/// Row selector S of the anchor term: identity, or P^T P.
inline Eigen::MatrixXd anchor_selector(int rows, int classes, AnchorScope scope) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(rows, rows);
  if (scope == AnchorScope::kLabelRows) s.bottomRightCorner(rows - classes, rows - classes).setZero();
  return s;
}

/// Gradients of the K subproblem
///   lambda/2 |S(K - A)|^2 + mu/2 |P K_h - P K_b|^2 + <M, J - K> + phi/2 |J - K|^2
/// summed over both streams.
inline KUpdate k_gradient(const KUpdate& k, const Eigen::MatrixXd& j_h, const Eigen::MatrixXd& j_b,
                          const Eigen::MatrixXd& a_h, const Eigen::MatrixXd& a_b,
                          const Eigen::MatrixXd& m_h, const Eigen::MatrixXd& m_b,
                          const SolverWeights& w, int classes, AnchorScope scope) {
  const int n = static_cast<int>(j_h.rows());
  const Eigen::MatrixXd s = anchor_selector(n, classes, scope);
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n).topRows(classes);
  const Eigen::MatrixXd coupling = p.transpose() * (p * k.head - p * k.body);
  KUpdate g;
  g.head = w.lambda_h * s * (k.head - a_h) + w.mu * coupling - m_h - w.phi_h * (j_h - k.head);
  g.body = w.lambda_b * s * (k.body - a_b) - w.mu * coupling - m_b - w.phi_b * (j_b - k.body);
  return g;
}

/// The K subproblem's normal equations assembled as one dense system over
/// [vec K_h; vec K_b] (Kronecker form) and solved by LU.
inline KUpdate dense_k_solve(const Eigen::MatrixXd& j_h, const Eigen::MatrixXd& j_b,
                             const Eigen::MatrixXd& a_h, const Eigen::MatrixXd& a_b,
                             const Eigen::MatrixXd& m_h, const Eigen::MatrixXd& m_b,
                             const SolverWeights& w, int classes, AnchorScope scope) {
  const Eigen::Index n = j_h.rows(), t = j_h.cols(), nt = n * t;
  const Eigen::MatrixXd s = anchor_selector(static_cast<int>(n), classes, scope);
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n).topRows(classes);
  const Eigen::MatrixXd ptp = p.transpose() * p;
  const Eigen::MatrixXd eye_t = Eigen::MatrixXd::Identity(t, t);
  auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  };
  const Eigen::MatrixXd eye_n = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lhs(2 * nt, 2 * nt);
  lhs.topLeftCorner(nt, nt) = kron(eye_t, w.lambda_h * s + w.mu * ptp + w.phi_h * eye_n);
  lhs.bottomRightCorner(nt, nt) = kron(eye_t, w.lambda_b * s + w.mu * ptp + w.phi_b * eye_n);
  lhs.topRightCorner(nt, nt) = kron(eye_t, -w.mu * ptp);
  lhs.bottomLeftCorner(nt, nt) = kron(eye_t, -w.mu * ptp);
  const Eigen::MatrixXd r_h = w.lambda_h * s * a_h + w.phi_h * j_h + m_h;
  const Eigen::MatrixXd r_b = w.lambda_b * s * a_b + w.phi_b * j_b + m_b;
  Eigen::VectorXd rhs(2 * nt);
  rhs << Eigen::Map<const Eigen::VectorXd>(r_h.data(), nt),
      Eigen::Map<const Eigen::VectorXd>(r_b.data(), nt);
  const Eigen::VectorXd x = lhs.partialPivLu().solve(rhs);
  KUpdate k;
  k.head = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, t);
  k.body = Eigen::Map<const Eigen::MatrixXd>(x.data() + nt, n, t);
  return k;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hbpe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hbpe::testing

#endif  // HBPE_TESTS_SUPPORT_HPP
