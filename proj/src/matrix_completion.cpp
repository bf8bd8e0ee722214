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

#include "hbpe/matrix_completion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hbpe/checkpoint.hpp"
#include "hbpe/error.hpp"

namespace hbpe {

namespace {

std::string shape(const Eigen::MatrixXd& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(what) + ": " + shape(a) + " vs " + shape(b));
  }
}

Eigen::MatrixXd ones_row_stack(const Eigen::MatrixXd& labels, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd data(labels.rows() + features.rows() + 1, labels.cols());
  data.topRows(labels.rows()) = labels;
  data.middleRows(labels.rows(), features.rows()) = features;
  data.bottomRows(1).setOnes();
  return data;
}

// Thin SVD of a finite matrix; wide inputs are decomposed via their transpose.
struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

ThinSvd thin_svd(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) {
    const auto bad = (!a.array().isFinite()).count();
    throw NumericalError("SVD input " + shape(a) + " has " + std::to_string(bad) +
                         " non-finite entries");
  }
  ThinSvd out;
  if (a.rows() >= a.cols()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose(),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixV();
    out.s = svd.singularValues();
    out.v = svd.matrixU();
  }
  if (!out.s.allFinite()) {
    throw NumericalError("SVD of " + shape(a) + " (|A|_F = " + std::to_string(a.norm()) +
                         ") produced non-finite singular values");
  }
  return out;
}

double anchor_gap(const Eigen::MatrixXd& j, const Eigen::MatrixXd& anchor, int classes,
                  AnchorScope scope) {
  return scope == AnchorScope::kAllRows ? (j - anchor).squaredNorm()
                                        : (j.topRows(classes) - anchor.topRows(classes)).squaredNorm();
}

// Everything in the objective except the nuclear norms.
double smooth_terms(const Eigen::MatrixXd& j_h, const Eigen::MatrixXd& j_b,
                    const Eigen::MatrixXd& anchor_h, const Eigen::MatrixXd& anchor_b,
                    const SolverWeights& w, int classes, AnchorScope scope) {
  return 0.5 * w.lambda_h * anchor_gap(j_h, anchor_h, classes, scope) +
         0.5 * w.lambda_b * anchor_gap(j_b, anchor_b, classes, scope) +
         0.5 * w.mu * (j_h.topRows(classes) - j_b.topRows(classes)).squaredNorm();
}

double relative(double value, double scale) { return scale > 0.0 ? value / scale : 0.0; }

bool primal_tail_monotone(const std::vector<ResidualRecord>& history) {
  const std::size_t window = 10;
  if (history.size() < 2) return true;
  const std::size_t start = history.size() > window ? history.size() - window : 0;
  for (std::size_t i = start + 1; i < history.size(); ++i) {
    for (int s = 0; s < 2; ++s) {
      if (history[i].primal[s] > history[i - 1].primal[s] * (1.0 + 1e-12) + 1e-300) return false;
    }
  }
  return true;
}

}  // namespace

HeterogeneousMatrix build_heterogeneous(const LabelMatrix& labels,
                                        const Eigen::MatrixXd& features,
                                        const std::optional<Eigen::MatrixXd>& init) {
  if (features.cols() != labels.length()) {
    throw ShapeMismatch("features have " + std::to_string(features.cols()) +
                        " columns, labels have " + std::to_string(labels.length()));
  }
  if (static_cast<int>(labels.observed.size()) != labels.length()) {
    throw ShapeMismatch("observation flags do not match label columns");
  }
  Eigen::MatrixXd y = labels.values;
  for (int t = 0; t < labels.length(); ++t) {
    if (labels.observed[static_cast<std::size_t>(t)]) continue;
    if (init) {
      y.col(t) = init->col(t);
    } else {
      y.col(t).setZero();
    }
  }
  if (init) require_same_shape(*init, labels.values, "label initialization");
  HeterogeneousMatrix j;
  j.classes = labels.classes();
  j.features = static_cast<int>(features.rows());
  j.data = ones_row_stack(y, features);
  return j;
}

HeterogeneousMatrix build_anchor(const Eigen::MatrixXd& label_anchor,
                                 const Eigen::MatrixXd& features) {
  if (features.cols() != label_anchor.cols()) {
    throw ShapeMismatch("anchor " + shape(label_anchor) + " vs features " + shape(features));
  }
  HeterogeneousMatrix j;
  j.classes = static_cast<int>(label_anchor.rows());
  j.features = static_cast<int>(features.rows());
  j.data = ones_row_stack(label_anchor, features);
  return j;
}

Eigen::MatrixXd LabelProjection::dense() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(classes, total_rows);
  p.leftCols(classes).setIdentity();
  return p;
}

Eigen::MatrixXd LabelProjection::adjoint(const Eigen::MatrixXd& y) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total_rows, y.cols());
  out.topRows(classes) = y;
  return out;
}

void SolverWeights::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto nonnegative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!positive(nu_h) || !positive(nu_b)) throw InvalidInput("nu_h and nu_b must be > 0");
  if (!nonnegative(lambda_h) || !nonnegative(lambda_b)) {
    throw InvalidInput("lambda_h and lambda_b must be >= 0");
  }
  if (!nonnegative(mu)) throw InvalidInput("mu must be >= 0");
  if (!positive(phi_h) || !positive(phi_b)) throw InvalidInput("phi_h and phi_b must be > 0");
}

std::string_view to_string(AnchorScope scope) {
  return scope == AnchorScope::kAllRows ? "all_rows" : "label_rows";
}

AnchorScope parse_anchor_scope(std::string_view name) {
  if (name == "all_rows") return AnchorScope::kAllRows;
  if (name == "label_rows") return AnchorScope::kLabelRows;
  throw InvalidInput("unknown anchor scope '" + std::string(name) + "'");
}

double nuclear_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return thin_svd(a).s.sum();
}

Eigen::MatrixXd svt(const Eigen::MatrixXd& a, double tau, double* nuclear_out) {
  if (!(tau >= 0.0)) throw InvalidInput("SVT threshold must be >= 0");
  if (a.size() == 0) {
    if (nuclear_out) *nuclear_out = 0.0;
    return a;
  }
  const ThinSvd svd = thin_svd(a);
  const Eigen::VectorXd shrunk = (svd.s.array() - tau).cwiseMax(0.0).matrix();
  if (nuclear_out) *nuclear_out = shrunk.sum();
  Eigen::Index rank = 0;
  while (rank < shrunk.size() && shrunk(rank) > 0.0) ++rank;
  if (rank == 0) return Eigen::MatrixXd::Zero(a.rows(), a.cols());
  return svd.u.leftCols(rank) * shrunk.head(rank).asDiagonal() * svd.v.leftCols(rank).transpose();
}

Eigen::MatrixXd update_J(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, double nu,
                         double phi, double* nuclear_out) {
  require_same_shape(k, m, "update_J");
  if (!(phi > 0.0)) throw InvalidInput("penalty phi must be > 0");
  return svt(k - m / phi, nu / phi, nuclear_out);
}

KUpdate update_K(const Eigen::MatrixXd& j_h_next, const Eigen::MatrixXd& j_b_next,
                 const Eigen::MatrixXd& anchor_h, const Eigen::MatrixXd& anchor_b,
                 const Eigen::MatrixXd& m_h, const Eigen::MatrixXd& m_b,
                 const SolverWeights& w, int classes, AnchorScope scope) {
  require_same_shape(j_h_next, anchor_h, "update_K head anchor");
  require_same_shape(j_h_next, m_h, "update_K head multiplier");
  require_same_shape(j_b_next, anchor_b, "update_K body anchor");
  require_same_shape(j_b_next, m_b, "update_K body multiplier");
  if (j_h_next.cols() != j_b_next.cols()) throw ShapeMismatch("update_K: streams differ in T");
  if (classes > j_h_next.rows() || classes > j_b_next.rows()) {
    throw ShapeMismatch("update_K: more label rows than matrix rows");
  }

  KUpdate out;
  if (scope == AnchorScope::kAllRows) {
    out.head = (w.lambda_h * anchor_h + w.phi_h * j_h_next + m_h) / (w.lambda_h + w.phi_h);
    out.body = (w.lambda_b * anchor_b + w.phi_b * j_b_next + m_b) / (w.lambda_b + w.phi_b);
  } else {
    out.head = j_h_next + m_h / w.phi_h;
    out.body = j_b_next + m_b / w.phi_b;
  }

  const double a_hh = w.lambda_h + w.mu + w.phi_h;
  const double a_bb = w.lambda_b + w.mu + w.phi_b;
  const double det = a_hh * a_bb - w.mu * w.mu;
  if (!(det > 0.0)) throw NumericalError("update_K: singular 2x2 coupling system");

  const Eigen::MatrixXd r_h = w.lambda_h * anchor_h.topRows(classes) +
                              w.phi_h * j_h_next.topRows(classes) + m_h.topRows(classes);
  const Eigen::MatrixXd r_b = w.lambda_b * anchor_b.topRows(classes) +
                              w.phi_b * j_b_next.topRows(classes) + m_b.topRows(classes);
  out.head.topRows(classes) = (a_bb * r_h + w.mu * r_b) / det;
  out.body.topRows(classes) = (w.mu * r_h + a_hh * r_b) / det;
  return out;
}

Eigen::MatrixXd update_multipliers(const Eigen::MatrixXd& m, const Eigen::MatrixXd& j_next,
                                   const Eigen::MatrixXd& k_next, double phi) {
  require_same_shape(m, j_next, "update_multipliers");
  require_same_shape(m, k_next, "update_multipliers");
  return m + phi * (j_next - k_next);
}

double objective(const Eigen::MatrixXd& j_h, const Eigen::MatrixXd& j_b,
                 const Eigen::MatrixXd& anchor_h, const Eigen::MatrixXd& anchor_b,
                 const SolverWeights& w, int classes, AnchorScope scope) {
  require_same_shape(j_h, anchor_h, "objective head");
  require_same_shape(j_b, anchor_b, "objective body");
  return w.nu_h * nuclear_norm(j_h) + w.nu_b * nuclear_norm(j_b) +
         smooth_terms(j_h, j_b, anchor_h, anchor_b, w, classes, scope);
}

AdmmState initial_state(const SolveProblem& problem) {
  AdmmState state;
  state.classes = problem.initial_h.classes;
  state.j_h = problem.initial_h.data;
  state.j_b = problem.initial_b.data;
  state.k_h = state.j_h;
  state.k_b = state.j_b;
  state.m_h = Eigen::MatrixXd::Zero(state.j_h.rows(), state.j_h.cols());
  state.m_b = Eigen::MatrixXd::Zero(state.j_b.rows(), state.j_b.cols());
  return state;
}

namespace {

void validate_problem(const SolveProblem& p) {
  if (p.initial_h.classes != p.initial_b.classes) {
    throw ShapeMismatch("head and body label blocks differ in class count");
  }
  if (p.initial_h.length() != p.initial_b.length()) {
    throw ShapeMismatch("head and body matrices differ in T");
  }
  require_same_shape(p.initial_h.data, p.anchor_h, "head anchor");
  require_same_shape(p.initial_b.data, p.anchor_b, "body anchor");
}

void validate_state(const SolveProblem& p, const AdmmState& s) {
  require_same_shape(p.initial_h.data, s.j_h, "state J_h");
  require_same_shape(p.initial_h.data, s.k_h, "state K_h");
  require_same_shape(p.initial_h.data, s.m_h, "state M_h");
  require_same_shape(p.initial_b.data, s.j_b, "state J_b");
  require_same_shape(p.initial_b.data, s.k_b, "state K_b");
  require_same_shape(p.initial_b.data, s.m_b, "state M_b");
  if (s.classes != p.initial_h.classes) throw ShapeMismatch("state class count");
}

HeterogeneousMatrix with_data(const HeterogeneousMatrix& layout, Eigen::MatrixXd data) {
  HeterogeneousMatrix out = layout;
  out.data = std::move(data);
  return out;
}

}  // namespace

SolveResult resume(const SolveProblem& problem, AdmmState state, const SolverWeights& w,
                   const SolveOptions& options) {
  w.validate();
  validate_problem(problem);
  validate_state(problem, state);
  if (!(options.tol > 0.0)) throw InvalidInput("solver tolerance must be > 0");
  if (options.max_iter < 1) throw InvalidInput("max_iter must be >= 1");

  const int c = state.classes;
  SolveReport report;
  while (state.iteration < options.max_iter) {
    double nuc_h = 0.0;
    double nuc_b = 0.0;
    Eigen::MatrixXd j_h = update_J(state.k_h, state.m_h, w.nu_h, w.phi_h, &nuc_h);
    Eigen::MatrixXd j_b = update_J(state.k_b, state.m_b, w.nu_b, w.phi_b, &nuc_b);
    KUpdate k = update_K(j_h, j_b, problem.anchor_h, problem.anchor_b, state.m_h, state.m_b, w, c,
                         problem.anchor_scope);
    state.m_h = update_multipliers(state.m_h, j_h, k.head, w.phi_h);
    state.m_b = update_multipliers(state.m_b, j_b, k.body, w.phi_b);

    ResidualRecord rec;
    rec.primal = {(j_h - k.head).norm(), (j_b - k.body).norm()};
    rec.dual = {w.phi_h * (k.head - state.k_h).norm(), w.phi_b * (k.body - state.k_b).norm()};
    const double scale_h = std::max(j_h.norm(), k.head.norm());
    const double scale_b = std::max(j_b.norm(), k.body.norm());
    rec.primal_rel = {relative(rec.primal[0], scale_h), relative(rec.primal[1], scale_b)};
    rec.dual_rel = {relative(rec.dual[0], w.phi_h * scale_h),
                    relative(rec.dual[1], w.phi_b * scale_b)};

    state.j_h = std::move(j_h);
    state.j_b = std::move(j_b);
    state.k_h = std::move(k.head);
    state.k_b = std::move(k.body);
    ++state.iteration;

    if (!state.j_h.allFinite() || !state.j_b.allFinite() || !state.m_h.allFinite() ||
        !state.m_b.allFinite()) {
      throw Divergence("ADMM iterate became non-finite at iteration " +
                           std::to_string(state.iteration),
                       state.iteration);
    }

    state.objective_trace.push_back(w.nu_h * nuc_h + w.nu_b * nuc_b +
                                    smooth_terms(state.j_h, state.j_b, problem.anchor_h,
                                                 problem.anchor_b, w, c, problem.anchor_scope));
    state.residuals.push_back(rec);

    if (!options.checkpoint_path.empty() && options.checkpoint_every > 0 &&
        state.iteration % options.checkpoint_every == 0) {
      save_checkpoint(options.checkpoint_path, state);
    }

    if (rec.primal_rel[0] <= options.tol && rec.primal_rel[1] <= options.tol &&
        rec.dual_rel[0] <= options.tol && rec.dual_rel[1] <= options.tol) {
      report.converged = true;
      break;
    }
  }

  report.iterations = state.iteration;
  if (!state.residuals.empty()) {
    report.final_primal_residuals = state.residuals.back().primal_rel;
    report.final_dual_residuals = state.residuals.back().dual_rel;
  }
  report.objective_trace = state.objective_trace;
  report.primal_tail_monotone = primal_tail_monotone(state.residuals);
  const int bias_h = problem.initial_h.rows() - 1;
  const int bias_b = problem.initial_b.rows() - 1;
  report.bias_row_drift = {(state.j_h.row(bias_h).array() - 1.0).abs().maxCoeff(),
                           (state.j_b.row(bias_b).array() - 1.0).abs().maxCoeff()};

  SolveResult result;
  result.completed_h = with_data(problem.initial_h, state.j_h);
  result.completed_b = with_data(problem.initial_b, state.j_b);
  result.report = std::move(report);
  result.state = std::move(state);
  return result;
}

SolveResult solve(const SolveProblem& problem, const SolverWeights& weights,
                  const SolveOptions& options) {
  validate_problem(problem);
  return resume(problem, initial_state(problem), weights, options);
}

}  // namespace hbpe
