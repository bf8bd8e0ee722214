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
#include <limits>
#include <string>

#include "hbpe/error.hpp"
#include "hbpe/experiment.hpp"

namespace hbpe {

void PersonDataset::validate() const {
  const auto length = static_cast<Eigen::Index>(head_truth.size());
  if (length < 1) throw ShapeMismatch(person_id + ": empty label sequence");
  if (static_cast<Eigen::Index>(body_truth.size()) != length) {
    throw ShapeMismatch(person_id + ": head and body label lengths differ");
  }
  if (head_features.cols() != length || body_features.cols() != length) {
    throw ShapeMismatch(person_id + ": feature columns do not match T = " +
                        std::to_string(length));
  }
  for (const ClassVector* v : {&head_truth, &body_truth}) {
    for (int k : *v) {
      if (k < 0 || k >= classes) {
        throw InvalidInput(person_id + ": class index " + std::to_string(k) + " not in [0, " +
                           std::to_string(classes) + ")");
      }
    }
  }
  for (const auto* soft : {&soft_head, &soft_body}) {
    if (*soft && ((*soft)->rows() != classes || (*soft)->cols() != length)) {
      throw ShapeMismatch(person_id + ": soft labels must be c x T");
    }
  }
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kGprMc: return "gpr_mc";
    case Method::kLaplacianMc: return "laplacian_mc";
    case Method::kGprOnly: return "gpr_only";
    case Method::kLinearOnly: return "linear_only";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw InvalidInput("unknown method '" + std::string(name) +
                     "' (expected gpr_mc, laplacian_mc, gpr_only or linear_only)");
}

std::vector<Method> all_methods() {
  return {Method::kGprMc, Method::kLaplacianMc, Method::kGprOnly, Method::kLinearOnly};
}

std::vector<SolverWeights> WeightGrid::expand() const {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<SolverWeights> grid;
  for (double n : sorted(nu)) {
    for (double l : sorted(lambda)) {
      for (double m : sorted(mu)) {
        for (double p : sorted(phi)) grid.push_back(SolverWeights{n, n, l, l, m, p, p});
      }
    }
  }
  return grid;
}

void ExperimentConfig::validate() const {
  if (fractions.empty()) throw InvalidInput("no annotation fractions configured");
  for (double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) throw InvalidInput("annotation fractions must lie in (0, 1)");
  }
  if (repeats < 1) throw InvalidInput("repeats must be >= 1");
  if (max_retries < 1) throw InvalidInput("max_retries must be >= 1");
  if (folds < 2) throw InvalidInput("folds must be >= 2");
  if (!(tol > 0.0)) throw InvalidInput("tol must be > 0");
  if (max_iter < 1) throw InvalidInput("max_iter must be >= 1");
  if (methods.empty()) throw InvalidInput("no methods configured");
  if (kernel_grid.empty()) throw InvalidInput("kernel grid is empty");
  if (laplacian_weight_grid.empty()) throw InvalidInput("Laplacian weight grid is empty");
  const auto weights = weight_grid.expand();
  if (weights.empty()) throw InvalidInput("solver weight grid is empty");
  for (const SolverWeights& w : weights) w.validate();
  for (const RbfKernelParams& k : kernel_grid) k.validate();
  for (double w : laplacian_weight_grid) {
    if (!(w > 0.0)) throw InvalidInput("Laplacian weights must be > 0");
  }
  if (!(variance_keep > 0.0 && variance_keep <= 1.0)) {
    throw InvalidInput("variance_keep must lie in (0, 1]");
  }
  if (jobs < 1) throw InvalidInput("jobs must be >= 1");
}

InterpolatedLabels interpolate_stream(const LabelMatrix& labels, Method method,
                                      const MethodParams& params) {
  switch (method) {
    case Method::kGprMc:
    case Method::kGprOnly: return gpr_interpolate(labels, params.kernel);
    case Method::kLaplacianMc: return laplacian_smooth(labels, params.laplacian_weight);
    case Method::kLinearOnly: return linear_interpolate(labels);
  }
  throw InvalidInput("unknown method");
}

RunResult run_pipeline(const PersonDataset& person, const ObservationMask& train_h,
                       const ObservationMask& train_b, const std::vector<bool>& eval_h,
                       const std::vector<bool>& eval_b, Method method,
                       const MethodParams& params, const SolveOptions& options) {
  person.validate();
  const int c = person.classes;
  const LabelMatrix labels_h = LabelMatrix::from_classes(person.head_truth, c, train_h);
  const LabelMatrix labels_b = LabelMatrix::from_classes(person.body_truth, c, train_b);
  const InterpolatedLabels anchor_h = interpolate_stream(labels_h, method, params);
  const InterpolatedLabels anchor_b = interpolate_stream(labels_b, method, params);

  RunResult result;
  if (method == Method::kGprOnly || method == Method::kLinearOnly) {
    result.head_prediction = decode_labels(anchor_h.values);
    result.body_prediction = decode_labels(anchor_b.values);
  } else {
    SolveProblem problem;
    problem.initial_h = build_heterogeneous(labels_h, person.head_features, person.soft_head);
    problem.initial_b = build_heterogeneous(labels_b, person.body_features, person.soft_body);
    problem.anchor_h = build_anchor(anchor_h.values, person.head_features).data;
    problem.anchor_b = build_anchor(anchor_b.values, person.body_features).data;
    problem.anchor_scope = params.anchor_scope;
    SolveResult solved = solve(problem, params.weights, options);
    result.head_prediction = decode_labels(solved.completed_h.label_block());
    result.body_prediction = decode_labels(solved.completed_b.label_block());
    result.report = std::move(solved.report);
  }

  result.head_accuracy = accuracy(result.head_prediction, person.head_truth, eval_h);
  result.body_accuracy = accuracy(result.body_prediction, person.body_truth, eval_b);
  result.head_correct = correct_count(result.head_prediction, person.head_truth, eval_h);
  result.body_correct = correct_count(result.body_prediction, person.body_truth, eval_b);
  result.head_evaluated = static_cast<int>(std::count(eval_h.begin(), eval_h.end(), true));
  result.body_evaluated = static_cast<int>(std::count(eval_b.begin(), eval_b.end(), true));
  return result;
}

RunResult run_single(const PersonDataset& person, const ObservationMask& mask_h,
                     const ObservationMask& mask_b, Method method, const MethodParams& params,
                     const SolveOptions& options) {
  if (mask_h.length != person.length() || mask_b.length != person.length()) {
    throw ShapeMismatch(person.person_id + ": mask length does not match T");
  }
  return run_pipeline(person, mask_h, mask_b, mask_h.unobserved(), mask_b.unobserved(), method,
                      params, options);
}

RbfKernelParams select_kernel(const LabelMatrix& head, const LabelMatrix& body,
                              std::span<const RbfKernelParams> grid) {
  if (grid.empty()) throw InvalidInput("kernel hyperparameter grid is empty");
  auto targets = [](const LabelMatrix& labels) {
    const std::vector<int> idx = labels.observed_indices();
    Eigen::MatrixXd y(labels.classes(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      y.col(static_cast<Eigen::Index>(i)) = labels.values.col(idx[i]);
    }
    return y;
  };
  const Eigen::VectorXd times_h = observed_times(head);
  const Eigen::VectorXd times_b = observed_times(body);
  const Eigen::MatrixXd y_h = targets(head);
  const Eigen::MatrixXd y_b = targets(body);

  double best = -std::numeric_limits<double>::infinity();
  const RbfKernelParams* chosen = nullptr;
  for (const RbfKernelParams& p : grid) {
    try {
      const double lml = GprModel::fit(times_h, y_h, p).log_marginal_likelihood() +
                         GprModel::fit(times_b, y_b, p).log_marginal_likelihood();
      if (std::isfinite(lml) && lml > best) {
        best = lml;
        chosen = &p;
      }
    } catch (const IllConditionedKernel&) {
    }
  }
  if (chosen == nullptr) throw IllConditionedKernel("every kernel grid point failed to factorize");
  return *chosen;
}

std::vector<int> fold_sizes(int observed, int folds) {
  if (folds < 2) throw InvalidInput("folds must be >= 2");
  if (observed < folds) {
    throw InvalidInput("cannot split " + std::to_string(observed) + " observed labels into " +
                       std::to_string(folds) + " non-empty folds");
  }
  std::vector<int> sizes(static_cast<std::size_t>(folds), observed / folds);
  for (int f = 0; f < observed % folds; ++f) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

namespace {

struct FoldSplit {
  ObservationMask train;
  std::vector<bool> held_out;
};

std::vector<FoldSplit> block_folds(const ObservationMask& mask, int folds) {
  const std::vector<int> sizes = fold_sizes(static_cast<int>(mask.indices.size()), folds);
  std::vector<FoldSplit> out;
  std::size_t start = 0;
  for (int size : sizes) {
    FoldSplit split;
    split.train.length = mask.length;
    split.train.seed = mask.seed;
    split.held_out.assign(static_cast<std::size_t>(mask.length), false);
    for (std::size_t i = 0; i < mask.indices.size(); ++i) {
      if (i >= start && i < start + static_cast<std::size_t>(size)) {
        split.held_out[static_cast<std::size_t>(mask.indices[i])] = true;
      } else {
        split.train.indices.push_back(mask.indices[i]);
      }
    }
    split.train.fraction =
        static_cast<double>(split.train.indices.size()) / static_cast<double>(mask.length);
    start += static_cast<std::size_t>(size);
    out.push_back(std::move(split));
  }
  return out;
}

}  // namespace

CvOutcome cross_validate(const PersonDataset& person, const ObservationMask& mask_h,
                         const ObservationMask& mask_b, Method method,
                         const ExperimentConfig& config) {
  CvOutcome outcome;
  outcome.params.anchor_scope = config.anchor_scope;
  if (method == Method::kLinearOnly) return outcome;

  const int c = person.classes;
  if (method == Method::kGprMc || method == Method::kGprOnly) {
    outcome.params.kernel =
        select_kernel(LabelMatrix::from_classes(person.head_truth, c, mask_h),
                      LabelMatrix::from_classes(person.body_truth, c, mask_b), config.kernel_grid);
  }
  if (method == Method::kGprOnly) return outcome;

  const std::vector<FoldSplit> folds_h = block_folds(mask_h, config.folds);
  const std::vector<FoldSplit> folds_b = block_folds(mask_b, config.folds);

  std::vector<MethodParams> candidates;
  const std::vector<double> lap = method == Method::kLaplacianMc
                                      ? config.laplacian_weight_grid
                                      : std::vector<double>{outcome.params.laplacian_weight};
  for (const SolverWeights& w : config.weight_grid.expand()) {
    for (double l : lap) {
      MethodParams p = outcome.params;
      p.weights = w;
      p.laplacian_weight = l;
      candidates.push_back(p);
    }
  }

  SolveOptions options;
  options.tol = config.tol;
  options.max_iter = config.max_iter;

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double score = 0.0;
    try {
      for (int f = 0; f < config.folds; ++f) {
        const auto& fh = folds_h[static_cast<std::size_t>(f)];
        const auto& fb = folds_b[static_cast<std::size_t>(f)];
        const RunResult r = run_pipeline(person, fh.train, fb.train, fh.held_out, fb.held_out,
                                         method, candidates[i], options);
        score += 0.5 * (r.head_accuracy + r.body_accuracy);
      }
      score /= config.folds;
    } catch (const NumericalError&) {
      score = -std::numeric_limits<double>::infinity();
    }
    outcome.grid_scores.push_back(score);
    if (score > best) {
      best = score;
      best_index = i;
    }
  }
  if (best_index == candidates.size()) {
    throw NumericalError(person.person_id + ": every cross-validation candidate failed");
  }
  outcome.params = candidates[best_index];
  outcome.score = best;
  return outcome;
}

}  // namespace hbpe
