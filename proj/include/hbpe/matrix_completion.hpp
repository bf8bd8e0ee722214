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

// Joint head/body matrix completion.
//
// Each stream stacks its label block, feature block and a ones row into a
// heterogeneous matrix J = [Y; X; 1]. The two matrices are completed jointly by
// minimizing
//
//   nu_h |J_h|_* + nu_b |J_b|_*
//     + lambda_h/2 |P_h (J_h - A_h)|^2 + lambda_b/2 |P_b (J_b - A_b)|^2
//     + mu/2 |P_h J_h - P_b J_b|^2
//
// where P selects the label rows and A is the interpolated label anchor
// (Y_GP stacked the same way). The splitting J = K with scaled multipliers M
// gives three steps per iteration: singular value thresholding for J, a
// closed-form joint solve for K, and a multiplier ascent step.

#ifndef HBPE_MATRIX_COMPLETION_HPP
#define HBPE_MATRIX_COMPLETION_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hbpe/pose_labels.hpp"

namespace hbpe {

/// J = [Y; X; 1], (c + d + 1) x T.
struct HeterogeneousMatrix {
  Eigen::MatrixXd data;
  int classes = 0;
  int features = 0;

  int rows() const { return static_cast<int>(data.rows()); }
  int length() const { return static_cast<int>(data.cols()); }
  auto label_block() const { return data.topRows(classes); }
  auto label_block() { return data.topRows(classes); }
  auto feature_block() const { return data.middleRows(classes, features); }
  auto bias_row() const { return data.row(classes + features); }
};

/// Observed columns one-hot, unobserved columns from \p init (soft labels) or
/// zero, then the features and a ones row.
HeterogeneousMatrix build_heterogeneous(const LabelMatrix& labels,
                                        const Eigen::MatrixXd& features,
                                        const std::optional<Eigen::MatrixXd>& init = std::nullopt);

/// Anchor matrix [Y_anchor; X; 1] with the same layout as build_heterogeneous.
HeterogeneousMatrix build_anchor(const Eigen::MatrixXd& label_anchor,
                                 const Eigen::MatrixXd& features);

/// P = [I_c, 0]: the first c rows of a (c + d + 1)-row matrix.
struct LabelProjection {
  int classes = 0;
  int total_rows = 0;

  Eigen::MatrixXd dense() const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& j) const { return j.topRows(classes); }
  /// P^T y: zero-pads a c x T block to total_rows.
  Eigen::MatrixXd adjoint(const Eigen::MatrixXd& y) const;
};

/// Rows on which the lambda-weighted anchor term acts.
enum class AnchorScope {
  kAllRows,    // lambda/2 |K - A|^2: labels pulled to the interpolation, features
               // and the ones row to their observed values
  kLabelRows,  // lambda/2 |P (K - A)|^2: feature and bias rows are unconstrained
};

std::string_view to_string(AnchorScope scope);
/// Accepts "all_rows" and "label_rows"; throws InvalidInput otherwise.
AnchorScope parse_anchor_scope(std::string_view name);

struct SolverWeights {
  double nu_h = 3.0;
  double nu_b = 3.0;
  double lambda_h = 1.0;
  double lambda_b = 1.0;
  double mu = 1.0;
  double phi_h = 1.0;
  double phi_b = 1.0;

  void validate() const;
  bool operator==(const SolverWeights&) const = default;
};

double nuclear_norm(const Eigen::MatrixXd& a);

/// U max(D - tau, 0) V^T. If \p nuclear_out is given, receives the nuclear
/// norm of the result.
Eigen::MatrixXd svt(const Eigen::MatrixXd& a, double tau, double* nuclear_out = nullptr);

/// argmin_J nu/phi |J|_* + 1/2 |M/phi + J - K|^2  =  svt(K - M/phi, nu/phi)
Eigen::MatrixXd update_J(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, double nu,
                         double phi, double* nuclear_out = nullptr);

struct KUpdate {
  Eigen::MatrixXd head;
  Eigen::MatrixXd body;
};

/// Exact minimizer of the K subproblem. Label entry (i, t) solves the 2x2
/// system
///   (lambda_h + mu + phi_h) k_h - mu k_b = lambda_h a_h + phi_h j_h + m_h
///   (lambda_b + mu + phi_b) k_b - mu k_h = lambda_b a_b + phi_b j_b + m_b
/// Feature and bias rows decouple per entry:
///   kAllRows:   k = (lambda a + phi j + m) / (lambda + phi)
///   kLabelRows: k = j + m / phi
KUpdate update_K(const Eigen::MatrixXd& j_h_next, const Eigen::MatrixXd& j_b_next,
                 const Eigen::MatrixXd& anchor_h, const Eigen::MatrixXd& anchor_b,
                 const Eigen::MatrixXd& m_h, const Eigen::MatrixXd& m_b,
                 const SolverWeights& w, int classes,
                 AnchorScope scope = AnchorScope::kAllRows);

/// M + phi (J - K)
Eigen::MatrixXd update_multipliers(const Eigen::MatrixXd& m, const Eigen::MatrixXd& j_next,
                                   const Eigen::MatrixXd& k_next, double phi);

/// The five-term completion objective.
double objective(const Eigen::MatrixXd& j_h, const Eigen::MatrixXd& j_b,
                 const Eigen::MatrixXd& anchor_h, const Eigen::MatrixXd& anchor_b,
                 const SolverWeights& w, int classes,
                 AnchorScope scope = AnchorScope::kAllRows);

struct ResidualRecord {
  std::array<double, 2> primal{};  // |J - K|_F, head and body
  std::array<double, 2> dual{};    // phi |K^{k+1} - K^k|_F
  std::array<double, 2> primal_rel{};
  std::array<double, 2> dual_rel{};
};

struct AdmmState {
  Eigen::MatrixXd j_h, j_b, k_h, k_b, m_h, m_b;
  int classes = 0;
  int iteration = 0;
  std::vector<ResidualRecord> residuals;
  std::vector<double> objective_trace;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::array<double, 2> final_primal_residuals{};  // relative
  std::array<double, 2> final_dual_residuals{};    // relative
  std::vector<double> objective_trace;
  /// Soft diagnostic: primal residuals did not increase over the last 10
  /// iterations.
  bool primal_tail_monotone = true;
  /// max_t |J(bias, t) - 1| per stream at exit.
  std::array<double, 2> bias_row_drift{};
};

struct SolveOptions {
  double tol = 1e-4;
  int max_iter = 500;
  /// Written every checkpoint_every iterations when non-empty.
  std::string checkpoint_path;
  int checkpoint_every = 0;
};

struct SolveProblem {
  HeterogeneousMatrix initial_h;
  HeterogeneousMatrix initial_b;
  Eigen::MatrixXd anchor_h;  // same shape as initial_h.data
  Eigen::MatrixXd anchor_b;
  AnchorScope anchor_scope = AnchorScope::kAllRows;
};

struct SolveResult {
  HeterogeneousMatrix completed_h;
  HeterogeneousMatrix completed_b;
  SolveReport report;
  AdmmState state;
};

/// K = J0, M = 0.
AdmmState initial_state(const SolveProblem& problem);

/// Runs ADMM from initial_state until both streams satisfy
/// primal_rel <= tol and dual_rel <= tol, or max_iter. Relative residuals are
/// normalized by max(|J|_F, |K|_F). Throws Divergence on a non-finite iterate.
SolveResult solve(const SolveProblem& problem, const SolverWeights& weights,
                  const SolveOptions& options = {});

/// Continues from a saved state; iteration counts carry over.
SolveResult resume(const SolveProblem& problem, AdmmState state, const SolverWeights& weights,
                   const SolveOptions& options = {});

}  // namespace hbpe

#endif  // HBPE_MATRIX_COMPLETION_HPP
