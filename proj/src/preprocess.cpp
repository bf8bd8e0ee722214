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

#include "hbpe/error.hpp"
#include "hbpe/experiment.hpp"

namespace hbpe {

PreprocessedFeatures preprocess_features(const Eigen::MatrixXd& features, double variance_keep) {
  if (features.size() == 0) throw InvalidInput("cannot preprocess an empty feature matrix");
  if (!(variance_keep > 0.0 && variance_keep <= 1.0)) {
    throw InvalidInput("variance_keep must lie in (0, 1]");
  }
  if (!features.allFinite()) throw InvalidInput("feature matrix has non-finite entries");

  const Eigen::Index length = features.cols();
  PreprocessedFeatures out;
  FeatureTransform& tf = out.transform;

  std::vector<double> means;
  std::vector<double> scales;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const double mean = features.row(r).mean();
    const double sd = std::sqrt((features.row(r).array() - mean).square().mean());
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      tf.kept_rows.push_back(static_cast<int>(r));
      means.push_back(mean);
      scales.push_back(sd);
    }
  }
  const auto kept = static_cast<Eigen::Index>(tf.kept_rows.size());
  tf.mean = Eigen::Map<Eigen::VectorXd>(means.data(), kept);
  tf.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), kept);
  if (kept == 0) {
    tf.components.resize(0, 0);
    out.features.resize(0, length);
    return out;
  }

  Eigen::MatrixXd z(kept, length);
  for (Eigen::Index i = 0; i < kept; ++i) {
    z.row(i) = (features.row(tf.kept_rows[static_cast<std::size_t>(i)]).array() - tf.mean(i)) /
               tf.scale(i);
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU);
  const Eigen::VectorXd s = svd.singularValues();
  const double cutoff = s(0) * 1e-10 * static_cast<double>(std::max(kept, length));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  const Eigen::VectorXd energy = s.head(rank).array().square();
  const double total = energy.sum();

  Eigen::Index k = 0;
  double cumulative = 0.0;
  while (k < rank) {
    cumulative += energy(k);
    ++k;
    if (cumulative / total >= variance_keep - 1e-12) break;
  }
  tf.components = svd.matrixU().leftCols(k);
  tf.explained_variance_ratio = energy.head(k) / total;
  out.features = tf.components.transpose() * z;
  // projections of zero-mean rows are zero-mean up to rounding; remove it
  out.features.colwise() -= out.features.rowwise().mean();
  return out;
}

}  // namespace hbpe
