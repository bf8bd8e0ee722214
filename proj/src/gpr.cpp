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

#include "hbpe/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hbpe/error.hpp"

namespace hbpe {

namespace {

constexpr double kJitterStart = 1e-8;
constexpr double kJitterMax = 1e-2;

void check_strictly_increasing(const Eigen::VectorXd& times) {
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times(i))) throw InvalidInput("GP input time is not finite");
    if (i > 0 && !(times(i) > times(i - 1))) {
      throw InvalidInput("GP input times must be strictly increasing (index " +
                         std::to_string(i) + ")");
    }
  }
}

// Thomas algorithm for a symmetric tridiagonal system; diag/off are copied.
Eigen::VectorXd solve_tridiagonal(Eigen::VectorXd diag, const Eigen::VectorXd& off,
                                  Eigen::VectorXd rhs) {
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    const double w = off(i - 1) / diag(i - 1);
    diag(i) -= w * off(i - 1);
    rhs(i) -= w * rhs(i - 1);
  }
  Eigen::VectorXd x(n);
  x(n - 1) = rhs(n - 1) / diag(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    x(i) = (rhs(i) - off(i) * x(i + 1)) / diag(i);
  }
  return x;
}

}  // namespace

void RbfKernelParams::validate() const {
  if (!(std::isfinite(length_scale) && length_scale > 0.0)) {
    throw InvalidInput("RBF length_scale must be finite and > 0");
  }
  if (!(std::isfinite(signal_variance) && signal_variance > 0.0)) {
    throw InvalidInput("RBF signal_variance must be finite and > 0");
  }
  if (!(std::isfinite(noise_variance) && noise_variance >= 0.0)) {
    throw InvalidInput("RBF noise_variance must be finite and >= 0");
  }
}

Eigen::MatrixXd rbf_kernel(const Eigen::VectorXd& t1, const Eigen::VectorXd& t2,
                           const RbfKernelParams& params) {
  params.validate();
  const double inv = 1.0 / (2.0 * params.length_scale * params.length_scale);
  Eigen::MatrixXd k(t1.size(), t2.size());
  for (Eigen::Index j = 0; j < t2.size(); ++j) {
    for (Eigen::Index i = 0; i < t1.size(); ++i) {
      const double d = t1(i) - t2(j);
      k(i, j) = params.signal_variance * std::exp(-d * d * inv);
    }
  }
  return k;
}

std::string_view to_string(InterpolationSource source) {
  switch (source) {
    case InterpolationSource::kGpr: return "gpr";
    case InterpolationSource::kLaplacian: return "laplacian";
    case InterpolationSource::kLinear: return "linear";
  }
  return "unknown";
}

GprModel GprModel::fit(const Eigen::VectorXd& times, const Eigen::MatrixXd& targets,
                       const RbfKernelParams& params) {
  params.validate();
  if (times.size() < 1) throw InvalidInput("GP fit needs at least one observation");
  if (targets.cols() != times.size()) {
    throw ShapeMismatch("GP targets have " + std::to_string(targets.cols()) +
                        " columns for " + std::to_string(times.size()) + " times");
  }
  check_strictly_increasing(times);

  GprModel model;
  model.times_ = times;
  model.targets_ = targets;
  model.kernel_ = params;

  const Eigen::MatrixXd gram = rbf_kernel(times, times, params);
  const Eigen::Index n = times.size();
  // Plain noise first, then jitter 1e-8, 1e-7, ..., 1e-2.
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += params.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite() &&
        (llt.matrixLLT().diagonal().array() > 0.0).all()) {
      model.jitter_ = jitter;
      model.lower_ = llt.matrixL();
      model.alpha_ = llt.solve(targets.transpose());
      break;
    }
    jitter = jitter == 0.0 ? kJitterStart : jitter * 10.0;
    if (jitter > kJitterMax * (1.0 + 1e-12)) {
      throw IllConditionedKernel("RBF gram matrix (n=" + std::to_string(n) +
                                 ", length_scale=" + std::to_string(params.length_scale) +
                                 ") is not positive definite even with jitter 1e-2");
    }
  }
  return model;
}

Eigen::MatrixXd GprModel::posterior_mean(const Eigen::VectorXd& query) const {
  const Eigen::MatrixXd cross = rbf_kernel(query, times_, kernel_);  // |q| x n
  return (cross * alpha_).transpose();
}

double GprModel::log_marginal_likelihood() const {
  const Eigen::Index n = times_.size();
  const double log_det_half = lower_.diagonal().array().log().sum();
  const double fit = (targets_.transpose().array() * alpha_.array()).sum();  // sum_r y_r^T alpha_r
  const double rows = static_cast<double>(targets_.rows());
  return -0.5 * fit - rows * log_det_half -
         rows * 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

InterpolatedLabels gpr_predict(const GprModel& model, const Eigen::VectorXd& query_times) {
  InterpolatedLabels out;
  out.source = InterpolationSource::kGpr;
  out.values = model.posterior_mean(query_times);
  const Eigen::VectorXd& train = model.times();
  const double* begin = train.data();
  const double* end = begin + train.size();
  for (Eigen::Index q = 0; q < query_times.size(); ++q) {
    const double* hit = std::lower_bound(begin, end, query_times(q));
    if (hit != end && *hit == query_times(q)) {
      out.values.col(q) = model.targets().col(hit - begin);
    }
  }
  return out;
}

Eigen::VectorXd observed_times(const LabelMatrix& labels) {
  const std::vector<int> idx = labels.observed_indices();
  Eigen::VectorXd times(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) times(static_cast<Eigen::Index>(i)) = idx[i];
  return times;
}

InterpolatedLabels gpr_interpolate(const LabelMatrix& labels, const RbfKernelParams& params) {
  const std::vector<int> idx = labels.observed_indices();
  if (idx.empty()) throw InvalidInput("GP interpolation needs at least one observed column");
  Eigen::MatrixXd targets(labels.classes(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    targets.col(static_cast<Eigen::Index>(i)) = labels.values.col(idx[i]);
  }
  const GprModel model = GprModel::fit(observed_times(labels), targets, params);
  const Eigen::VectorXd query = Eigen::VectorXd::LinSpaced(labels.length(), 0.0,
                                                           labels.length() - 1.0);
  return gpr_predict(model, query);
}

RbfKernelParams fit_kernel_hyperparams(const Eigen::VectorXd& times,
                                       const Eigen::MatrixXd& targets,
                                       std::span<const RbfKernelParams> grid) {
  if (grid.empty()) throw InvalidInput("kernel hyperparameter grid is empty");
  double best = -std::numeric_limits<double>::infinity();
  const RbfKernelParams* chosen = nullptr;
  for (const RbfKernelParams& p : grid) {
    try {
      const double lml = GprModel::fit(times, targets, p).log_marginal_likelihood();
      if (std::isfinite(lml) && lml > best) {
        best = lml;
        chosen = &p;
      }
    } catch (const IllConditionedKernel&) {
    }
  }
  if (chosen == nullptr) {
    throw IllConditionedKernel("every kernel grid point failed to factorize");
  }
  return *chosen;
}

std::vector<RbfKernelParams> default_kernel_grid() {
  std::vector<RbfKernelParams> grid;
  for (double ell : {2.0, 5.0, 10.0, 20.0, 40.0}) {
    for (double sf : {0.25, 1.0}) {
      for (double sn : {1e-4, 1e-2, 1e-1}) grid.push_back({ell, sf, sn});
    }
  }
  return grid;
}

InterpolatedLabels laplacian_smooth(const LabelMatrix& labels, double weight) {
  if (!(std::isfinite(weight) && weight > 0.0)) {
    throw InvalidInput("Laplacian smoothing weight must be finite and > 0");
  }
  const Eigen::Index length = labels.length();
  if (labels.observed_indices().empty()) {
    throw InvalidInput("Laplacian smoothing needs at least one observed column");
  }
  Eigen::VectorXd diag(length);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(std::max<Eigen::Index>(length - 1, 0), -weight);
  for (Eigen::Index t = 0; t < length; ++t) {
    const double degree = (t > 0 ? 1.0 : 0.0) + (t + 1 < length ? 1.0 : 0.0);
    diag(t) = (labels.observed[static_cast<std::size_t>(t)] ? 1.0 : 0.0) + weight * degree;
  }
  InterpolatedLabels out;
  out.source = InterpolationSource::kLaplacian;
  out.values.resize(labels.classes(), length);
  for (Eigen::Index k = 0; k < labels.classes(); ++k) {
    Eigen::VectorXd rhs(length);
    for (Eigen::Index t = 0; t < length; ++t) {
      rhs(t) = labels.observed[static_cast<std::size_t>(t)] ? labels.values(k, t) : 0.0;
    }
    out.values.row(k) = solve_tridiagonal(diag, off, rhs).transpose();
  }
  return out;
}

InterpolatedLabels linear_interpolate(const LabelMatrix& labels) {
  const std::vector<int> idx = labels.observed_indices();
  if (idx.empty()) throw InvalidInput("linear interpolation needs at least one observed column");
  InterpolatedLabels out;
  out.source = InterpolationSource::kLinear;
  out.values.resize(labels.classes(), labels.length());
  std::size_t next = 0;  // first observed index >= t
  for (int t = 0; t < labels.length(); ++t) {
    while (next < idx.size() && idx[next] < t) ++next;
    if (next == idx.size()) {
      out.values.col(t) = labels.values.col(idx.back());
    } else if (idx[next] == t || next == 0) {
      out.values.col(t) = labels.values.col(idx[next]);
    } else {
      const int lo = idx[next - 1];
      const int hi = idx[next];
      const double w = static_cast<double>(t - lo) / static_cast<double>(hi - lo);
      out.values.col(t) = (1.0 - w) * labels.values.col(lo) + w * labels.values.col(hi);
    }
  }
  return out;
}

}  // namespace hbpe
