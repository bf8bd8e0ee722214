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

// Experiment harness: synthetic people, feature preprocessing, the per-person
// pipeline, cross-validated hyperparameter search and annotation sweeps.

#ifndef HBPE_EXPERIMENT_HPP
#define HBPE_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hbpe/gpr.hpp"
#include "hbpe/matrix_completion.hpp"
#include "hbpe/pose_labels.hpp"

namespace hbpe {

struct PersonDataset {
  std::string person_id;
  int classes = kDefaultClasses;
  Eigen::MatrixXd head_features;  // d_h x T
  Eigen::MatrixXd body_features;  // d_b x T
  ClassVector head_truth;
  ClassVector body_truth;
  std::optional<Eigen::MatrixXd> soft_head;  // c x T
  std::optional<Eigen::MatrixXd> soft_body;

  int length() const { return static_cast<int>(head_truth.size()); }
  /// Throws ShapeMismatch / InvalidInput on inconsistent columns or classes.
  void validate() const;
};

struct SyntheticSpec {
  int length = 600;
  int classes = kDefaultClasses;
  int head_features = 20;
  int body_features = 20;
  int turn_events = 8;
  double gp_length_scale = 60.0;  // of the head-body offset process, samples
  int feature_rank = kDefaultClasses;
  double feature_noise = 0.1;
  double head_body_offset_deg = 20.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticTrajectory {
  Eigen::VectorXd body_deg;
  Eigen::VectorXd head_deg;
};

/// Body: piecewise-constant heading with turn_events random turns, smoothed.
/// Head: body plus a smooth random offset of scale head_body_offset_deg.
/// With no turn events the person is static and both streams hold one class.
SyntheticTrajectory generate_trajectory(const SyntheticSpec& spec);

/// Labels from generate_trajectory and features X = A Y + noise with A of rank
/// feature_rank, per stream.
PersonDataset generate_synthetic(const SyntheticSpec& spec,
                                 std::string person_id = "synthetic");

struct FeatureTransform {
  std::vector<int> kept_rows;  // non-constant input rows
  Eigen::VectorXd mean;        // per kept row
  Eigen::VectorXd scale;       // per kept row (standard deviation)
  Eigen::MatrixXd components;  // kept_rows x k, orthonormal columns
  Eigen::VectorXd explained_variance_ratio;  // length k
};

struct PreprocessedFeatures {
  Eigen::MatrixXd features;  // k x T
  FeatureTransform transform;
};

/// Row standardization followed by projection onto the fewest principal
/// components whose cumulative explained variance reaches variance_keep.
PreprocessedFeatures preprocess_features(const Eigen::MatrixXd& features, double variance_keep);

enum class Method { kGprMc, kLaplacianMc, kGprOnly, kLinearOnly };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

/// Everything a single run needs beyond data and masks.
struct MethodParams {
  SolverWeights weights;
  RbfKernelParams kernel;
  double laplacian_weight = 1.0;
  AnchorScope anchor_scope = AnchorScope::kAllRows;
};

struct RunResult {
  double head_accuracy = 0.0;
  double body_accuracy = 0.0;
  int head_correct = 0;
  int head_evaluated = 0;
  int body_correct = 0;
  int body_evaluated = 0;
  ClassVector head_prediction;
  ClassVector body_prediction;
  std::optional<SolveReport> report;  // absent for interpolation-only methods
};

/// Interpolated label anchor for one stream under \p method.
InterpolatedLabels interpolate_stream(const LabelMatrix& labels, Method method,
                                      const MethodParams& params);

/// Trains on the masks' columns and scores on the explicit evaluation flags.
RunResult run_pipeline(const PersonDataset& person, const ObservationMask& train_h,
                       const ObservationMask& train_b, const std::vector<bool>& eval_h,
                       const std::vector<bool>& eval_b, Method method,
                       const MethodParams& params, const SolveOptions& options);

/// encode -> interpolate -> build J0 -> solve -> decode -> accuracy over the
/// unobserved columns of each stream.
RunResult run_single(const PersonDataset& person, const ObservationMask& mask_h,
                     const ObservationMask& mask_b, Method method, const MethodParams& params,
                     const SolveOptions& options);

struct WeightGrid {
  std::vector<double> nu{1.0, 3.0, 10.0};
  std::vector<double> lambda{1.0, 3.0};
  std::vector<double> mu{0.0, 1.0};
  std::vector<double> phi{1.0};

  /// Cross product with nu_h = nu_b, lambda_h = lambda_b, phi_h = phi_b,
  /// ordered by (nu, lambda, mu, phi) ascending.
  std::vector<SolverWeights> expand() const;
};

struct ExperimentConfig {
  std::vector<double> fractions{0.05, 0.1, 0.2, 0.3, 0.5};
  int repeats = 10;
  double diversity_threshold = 0.75;
  int max_retries = 100;
  WeightGrid weight_grid;
  std::vector<RbfKernelParams> kernel_grid = default_kernel_grid();
  std::vector<double> laplacian_weight_grid{0.1, 1.0, 10.0};
  int folds = 5;
  double tol = 1e-4;
  int max_iter = 500;
  std::uint64_t seed = 0;
  std::vector<Method> methods = all_methods();
  /// Re-run cross-validation for every repeat; otherwise select once per
  /// (person, fraction, method) on the first repeat's masks.
  bool cv_per_repeat = true;
  double variance_keep = 0.9;
  /// Soft labels initialize unobserved label columns when present.
  bool use_soft_labels = true;
  AnchorScope anchor_scope = AnchorScope::kAllRows;
  int jobs = 1;

  void validate() const;
};

/// Kernel maximizing the summed head + body log marginal likelihood.
RbfKernelParams select_kernel(const LabelMatrix& head, const LabelMatrix& body,
                              std::span<const RbfKernelParams> grid);

/// Contiguous fold sizes for n observed labels: the first n % k folds get one
/// extra. Throws InvalidInput if any fold would be empty.
std::vector<int> fold_sizes(int observed, int folds);

struct CvOutcome {
  MethodParams params;
  double score = 0.0;  // mean held-out (head + body) / 2 accuracy
  std::vector<double> grid_scores;  // aligned with the searched candidates
};

/// Block k-fold search over the weight grid (and Laplacian weights for
/// laplacian_mc) on the observed columns of the masks. Ties go to smaller nu,
/// then lambda, then mu.
CvOutcome cross_validate(const PersonDataset& person, const ObservationMask& mask_h,
                         const ObservationMask& mask_b, Method method,
                         const ExperimentConfig& config);

struct RepeatRecord {
  std::string person_id;
  double fraction = 0.0;
  Method method = Method::kGprMc;
  int repeat = 0;
  bool ok = false;
  std::string error;
  int error_code = 0;
  double head_accuracy = 0.0;
  double body_accuracy = 0.0;
  int head_correct = 0;
  int head_evaluated = 0;
  int body_correct = 0;
  int body_evaluated = 0;
  int iterations = 0;
  bool converged = false;
  MethodParams params;
  std::uint64_t mask_seed_h = 0;
  std::uint64_t mask_seed_b = 0;
};

struct SweepRow {
  std::string person_id;
  double fraction = 0.0;
  Method method = Method::kGprMc;
  double head_mean = 0.0;
  double head_std = 0.0;
  double body_mean = 0.0;
  double body_std = 0.0;
  double head_entropy = 0.0;
  double body_entropy = 0.0;
  int completed = 0;
  int failed = 0;
};

/// Across people for one (fraction, method): macro = mean of per-person means,
/// micro = pooled correct / pooled evaluated.
struct PooledRow {
  double fraction = 0.0;
  Method method = Method::kGprMc;
  double head_macro = 0.0;
  double body_macro = 0.0;
  double head_micro = 0.0;
  double body_micro = 0.0;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<RepeatRecord> records;
  std::vector<SweepRow> rows;
  std::vector<PooledRow> pooled;
  int failed_units = 0;
};

/// Called after each finished record (from the thread that produced it, one at
/// a time).
using RecordSink = std::function<void(const RepeatRecord&)>;

/// person x fraction x repeat with fresh diversity-checked masks shared by all
/// methods of a repeat. Failures are recorded per unit and the sweep goes on.
SweepResult run_sweep(const std::vector<PersonDataset>& datasets, const ExperimentConfig& config,
                      const RecordSink& sink = {});

/// Sample standard deviation (n - 1); zero for fewer than two values.
double sample_std(std::span<const double> values);

/// Per-person rows and pooled rows from records (as run_sweep does).
void aggregate(SweepResult& result, const std::vector<PersonDataset>& datasets);

/// Seed for one mask draw; stream 0 = head, 1 = body.
std::uint64_t mask_seed(std::uint64_t base, int person, int fraction_index, int repeat,
                        int stream);

}  // namespace hbpe

#endif  // HBPE_EXPERIMENT_HPP
