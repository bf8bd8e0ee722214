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

#include "hbpe/pose_labels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "hbpe/error.hpp"

namespace hbpe {

PoseClass angle_to_class(double angle_deg, int classes) {
  if (classes < 2) throw InvalidInput("pose classes must be >= 2, got " + std::to_string(classes));
  if (!std::isfinite(angle_deg)) throw InvalidInput("pose angle is not finite");
  double normalized = std::fmod(angle_deg, 360.0);
  if (normalized < 0.0) normalized += 360.0;
  // fmod of a tiny negative number can round up to exactly 360
  if (normalized >= 360.0) normalized = 0.0;
  int index = static_cast<int>(std::floor(normalized / (360.0 / classes)));
  return PoseClass{std::min(index, classes - 1), classes};
}

Eigen::VectorXd encode_angle(double angle_deg, int classes) {
  const PoseClass pose = angle_to_class(angle_deg, classes);
  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(classes);
  onehot(pose.index) = 1.0;
  return onehot;
}

ClassVector decode_labels(const Eigen::Ref<const Eigen::MatrixXd>& labels) {
  ClassVector out(static_cast<std::size_t>(labels.cols()), 0);
  for (Eigen::Index t = 0; t < labels.cols(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < labels.rows(); ++k) {
      if (labels(k, t) > labels(best, t)) best = k;
    }
    out[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return out;
}

std::vector<bool> ObservationMask::observed() const {
  std::vector<bool> flags(static_cast<std::size_t>(length), false);
  for (int i : indices) flags[static_cast<std::size_t>(i)] = true;
  return flags;
}

std::vector<bool> ObservationMask::unobserved() const {
  std::vector<bool> flags = observed();
  flags.flip();
  return flags;
}

std::vector<int> LabelMatrix::observed_indices() const {
  std::vector<int> idx;
  for (std::size_t t = 0; t < observed.size(); ++t) {
    if (observed[t]) idx.push_back(static_cast<int>(t));
  }
  return idx;
}

LabelMatrix LabelMatrix::from_classes(const ClassVector& truth, int classes,
                                      const ObservationMask& mask) {
  if (static_cast<int>(truth.size()) != mask.length) {
    throw ShapeMismatch("label length " + std::to_string(truth.size()) +
                        " does not match mask length " + std::to_string(mask.length));
  }
  LabelMatrix out;
  out.values = Eigen::MatrixXd::Zero(classes, mask.length);
  out.observed = mask.observed();
  for (int t : mask.indices) {
    const int k = truth[static_cast<std::size_t>(t)];
    if (k < 0 || k >= classes) {
      throw InvalidInput("class index " + std::to_string(k) + " out of range at column " +
                         std::to_string(t));
    }
    out.values(k, t) = 1.0;
  }
  return out;
}

EntropyReport label_entropy(std::span<const int> labels, int classes) {
  if (labels.empty()) throw InvalidInput("entropy of an empty label vector");
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (int k : labels) {
    if (k < 0 || k >= classes) {
      throw InvalidInput("class index " + std::to_string(k) + " out of range [0, " +
                         std::to_string(classes) + ")");
    }
    counts[static_cast<std::size_t>(k)] += 1.0;
  }
  EntropyReport report;
  const double n = static_cast<double>(labels.size());
  for (double& p : counts) {
    p /= n;
    if (p > 0.0) report.value -= p * std::log(p);
  }
  report.value = std::max(report.value, 0.0);
  report.class_proportions = std::move(counts);
  return report;
}

namespace {

int classes_spanned(std::span<const int> labels) {
  int hi = 0;
  for (int k : labels) {
    if (k < 0) throw InvalidInput("negative class index " + std::to_string(k));
    hi = std::max(hi, k);
  }
  return std::max(hi + 1, 2);
}

}  // namespace

ObservationMask generate_mask(int length, double fraction, std::span<const int> full_labels,
                              std::uint64_t seed, const MaskOptions& options) {
  if (length < 1) throw InvalidInput("mask length must be >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidInput("mask fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  if (options.max_retries < 1) throw InvalidInput("max_retries must be >= 1");
  if (static_cast<int>(full_labels.size()) != length) {
    throw ShapeMismatch("full label vector length " + std::to_string(full_labels.size()) +
                        " != " + std::to_string(length));
  }

  const int count = std::clamp(static_cast<int>(std::lround(fraction * length)), 1, length);
  ObservationMask mask;
  mask.length = length;
  mask.fraction = fraction;
  mask.seed = seed;

  if (count == length) {
    mask.indices.resize(static_cast<std::size_t>(length));
    std::iota(mask.indices.begin(), mask.indices.end(), 0);
    return mask;
  }

  const int classes = classes_spanned(full_labels);
  const double required = options.diversity_threshold * label_entropy(full_labels, classes).value;

  std::mt19937_64 rng(seed);
  std::vector<int> pool(static_cast<std::size_t>(length));
  std::vector<int> drawn_labels(static_cast<std::size_t>(count));
  double best = -1.0;
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    std::iota(pool.begin(), pool.end(), 0);
    // partial Fisher-Yates: the first count slots are the sample
    for (int i = 0; i < count; ++i) {
      std::uniform_int_distribution<int> pick(i, length - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    for (int i = 0; i < count; ++i) {
      drawn_labels[static_cast<std::size_t>(i)] =
          full_labels[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])];
    }
    const double h = label_entropy(drawn_labels, classes).value;
    best = std::max(best, h);
    if (h >= required) {
      mask.indices.assign(pool.begin(), pool.begin() + count);
      std::sort(mask.indices.begin(), mask.indices.end());
      return mask;
    }
  }
  throw DiversityUnsatisfiable("no mask reached entropy " + std::to_string(required) +
                                   " after " + std::to_string(options.max_retries) +
                                   " draws; best " + std::to_string(best),
                               best);
}

int correct_count(std::span<const int> predicted, std::span<const int> truth,
                  const std::vector<bool>& eval_mask) {
  if (predicted.size() != truth.size() || truth.size() != eval_mask.size()) {
    throw ShapeMismatch("accuracy inputs differ in length");
  }
  int correct = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (eval_mask[t] && predicted[t] == truth[t]) ++correct;
  }
  return correct;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth,
                const std::vector<bool>& eval_mask) {
  const int correct = correct_count(predicted, truth, eval_mask);
  const auto evaluated = std::count(eval_mask.begin(), eval_mask.end(), true);
  if (evaluated == 0) throw UndefinedMetric("accuracy over an empty evaluation mask");
  return static_cast<double>(correct) / static_cast<double>(evaluated);
}

}  // namespace hbpe
