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

// Temporal interpolation of sparse one-hot label rows.
//
// Each class row is regressed independently against the column (time) index
// with a zero-mean Gaussian process under a shared RBF kernel. Two classical
// interpolators, Laplacian smoothing and piecewise-linear interpolation, sit
// alongside for comparison runs.

#ifndef HBPE_GPR_HPP
#define HBPE_GPR_HPP

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hbpe/pose_labels.hpp"

namespace hbpe {

struct RbfKernelParams {
  double length_scale = 10.0;  // in samples
  double signal_variance = 1.0;
  double noise_variance = 1e-2;

  /// Throws InvalidInput unless all fields are finite and positive
  /// (noise_variance may be zero).
  void validate() const;
  bool operator==(const RbfKernelParams&) const = default;
};

/// k(a, b) = signal_variance * exp(-(a - b)^2 / (2 length_scale^2))
Eigen::MatrixXd rbf_kernel(const Eigen::VectorXd& t1, const Eigen::VectorXd& t2,
                           const RbfKernelParams& params);

enum class InterpolationSource { kGpr, kLaplacian, kLinear };

std::string_view to_string(InterpolationSource source);

/// Interpolated label block (Y_GP or a baseline), c x T.
struct InterpolatedLabels {
  Eigen::MatrixXd values;
  InterpolationSource source = InterpolationSource::kGpr;
};

/// Fitted GP: one posterior per class row, sharing the Cholesky factor of
/// K(train, train) + (noise + jitter) I.
class GprModel {
 public:
  /// \p times must be strictly increasing; \p targets is c x n.
  static GprModel fit(const Eigen::VectorXd& times, const Eigen::MatrixXd& targets,
                      const RbfKernelParams& params);

  /// Posterior mean at \p query, c x |query|. Training columns are not
  /// overwritten here.
  Eigen::MatrixXd posterior_mean(const Eigen::VectorXd& query) const;

  /// Sum over class rows of log p(y_row | times, params).
  double log_marginal_likelihood() const;

  const Eigen::VectorXd& times() const { return times_; }
  const Eigen::MatrixXd& targets() const { return targets_; }
  const RbfKernelParams& kernel() const { return kernel_; }
  /// Diagonal jitter that was needed on top of noise_variance (0 if none).
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& cholesky_lower() const { return lower_; }

 private:
  Eigen::VectorXd times_;
  Eigen::MatrixXd targets_;  // c x n
  RbfKernelParams kernel_;
  double jitter_ = 0.0;
  Eigen::MatrixXd lower_;  // n x n lower-triangular factor
  Eigen::MatrixXd alpha_;  // n x c, (K + s I)^-1 targets^T
};

inline GprModel gpr_fit(const Eigen::VectorXd& times, const Eigen::MatrixXd& targets,
                        const RbfKernelParams& params) {
  return GprModel::fit(times, targets, params);
}

/// Y_GP at \p query_times: posterior mean, with columns that coincide with a
/// training time replaced by the training target verbatim.
InterpolatedLabels gpr_predict(const GprModel& model, const Eigen::VectorXd& query_times);

/// Fits on the observed columns of \p labels and predicts all T columns.
InterpolatedLabels gpr_interpolate(const LabelMatrix& labels, const RbfKernelParams& params);

/// Grid point with the largest summed log marginal likelihood. Points whose
/// factorization fails are skipped; throws IllConditionedKernel if all fail.
RbfKernelParams fit_kernel_hyperparams(const Eigen::VectorXd& times,
                                       const Eigen::MatrixXd& targets,
                                       std::span<const RbfKernelParams> grid);

/// length_scale {2,5,10,20,40} x signal_variance {0.25,1} x noise {1e-4,1e-2,1e-1}
std::vector<RbfKernelParams> default_kernel_grid();

/// Per class row, minimizes
///   sum_{t observed} (y_t - z_t)^2 + weight * sum_t (z_{t+1} - z_t)^2
/// by a tridiagonal solve.
InterpolatedLabels laplacian_smooth(const LabelMatrix& labels, double weight);

/// Piecewise-linear between observed columns, constant beyond the ends.
InterpolatedLabels linear_interpolate(const LabelMatrix& labels);

/// Column indices of \p labels' observed columns as GP input times.
Eigen::VectorXd observed_times(const LabelMatrix& labels);

}  // namespace hbpe

#endif  // HBPE_GPR_HPP
