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

// Pose classes, one-hot label matrices, observation masks and label metrics.

#ifndef HBPE_POSE_LABELS_HPP
#define HBPE_POSE_LABELS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hbpe {

inline constexpr int kDefaultClasses = 8;

/// Class index per time step.
using ClassVector = std::vector<int>;

/// A discretized orientation: sector k covers [k*360/c, (k+1)*360/c) degrees.
struct PoseClass {
  int index = 0;
  int classes = kDefaultClasses;

  double sector_width() const { return 360.0 / classes; }
  double lower_deg() const { return index * sector_width(); }
  double upper_deg() const { return (index + 1) * sector_width(); }
  double center_deg() const { return (index + 0.5) * sector_width(); }
};

PoseClass angle_to_class(double angle_deg, int classes = kDefaultClasses);

/// One-hot vector of length \p classes for the sector containing \p angle_deg.
Eigen::VectorXd encode_angle(double angle_deg, int classes = kDefaultClasses);

/// Column-wise argmax, ties resolved to the lowest row index.
ClassVector decode_labels(const Eigen::Ref<const Eigen::MatrixXd>& labels);

/// Sorted set of observed (training) columns.
struct ObservationMask {
  std::vector<int> indices;
  int length = 0;  // T
  double fraction = 1.0;
  std::uint64_t seed = 0;

  std::vector<bool> observed() const;
  std::vector<bool> unobserved() const;
};

/// Label block Y (c x T) with its observation flags. Observed columns are
/// exact one-hot; the rest hold whatever initialization was supplied.
struct LabelMatrix {
  Eigen::MatrixXd values;
  std::vector<bool> observed;

  int classes() const { return static_cast<int>(values.rows()); }
  int length() const { return static_cast<int>(values.cols()); }
  std::vector<int> observed_indices() const;

  /// One-hot at the mask's columns, zeros elsewhere.
  static LabelMatrix from_classes(const ClassVector& truth, int classes,
                                  const ObservationMask& mask);
};

struct EntropyReport {
  double value = 0.0;  // nats
  std::vector<double> class_proportions;
};

/// Shannon entropy (natural log) of the class histogram.
EntropyReport label_entropy(std::span<const int> labels, int classes);

struct MaskOptions {
  double diversity_threshold = 0.75;
  int max_retries = 100;
};

/// Draws round(fraction*T) columns uniformly without replacement, retrying
/// until the entropy of the drawn labels reaches
/// diversity_threshold * entropy(full_labels). At least one column is drawn.
ObservationMask generate_mask(int length, double fraction, std::span<const int> full_labels,
                              std::uint64_t seed, const MaskOptions& options = {});

/// Fraction of positions with eval_mask set where predicted == truth.
double accuracy(std::span<const int> predicted, std::span<const int> truth,
                const std::vector<bool>& eval_mask);

/// Number of positions with eval_mask set where predicted == truth.
int correct_count(std::span<const int> predicted, std::span<const int> truth,
                  const std::vector<bool>& eval_mask);

}  // namespace hbpe

#endif  // HBPE_POSE_LABELS_HPP
