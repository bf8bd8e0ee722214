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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hbpe/error.hpp"
#include "hbpe/gpr.hpp"
#include "support.hpp"

using namespace hbpe;

namespace {

Eigen::VectorXd increasing_times(std::mt19937_64& rng, int n, double lo_gap, double hi_gap) {
  Eigen::VectorXd t(n);
  double acc = testing::uniform_real(rng, -5.0, 5.0);
  for (int i = 0; i < n; ++i) {
    t(i) = acc;
    acc += testing::uniform_real(rng, lo_gap, hi_gap);
  }
  return t;
}

// (K* )^T (K + s I)^-1 Y^T by a dense LU solve.
Eigen::MatrixXd direct_posterior(const Eigen::VectorXd& t, const Eigen::MatrixXd& y,
                                 const Eigen::VectorXd& q, const RbfKernelParams& p) {
  auto k = [&](double a, double b) {
    return p.signal_variance * std::exp(-(a - b) * (a - b) / (2.0 * p.length_scale * p.length_scale));
  };
  Eigen::MatrixXd kk(t.size(), t.size()), ks(t.size(), q.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    for (Eigen::Index j = 0; j < t.size(); ++j) kk(i, j) = k(t(i), t(j));
    for (Eigen::Index j = 0; j < q.size(); ++j) ks(i, j) = k(t(i), q(j));
  }
  kk.diagonal().array() += p.noise_variance;
  return (ks.transpose() * kk.fullPivLu().solve(y.transpose())).transpose();
}

}  // namespace

TEST_CASE("rbf kernel values") {
  Eigen::VectorXd a(1), b(1);
  a << 0.0;
  b << 1.0;
  const Eigen::MatrixXd k = rbf_kernel(a, b, {1.0, 1.0, 0.0});
  CHECK(k(0, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(rbf_kernel(a, a, {3.0, 2.5, 0.0})(0, 0) == doctest::Approx(2.5));

  std::mt19937_64 rng(1);
  const Eigen::VectorXd t = increasing_times(rng, 30, 0.1, 2.0);
  const Eigen::MatrixXd g = rbf_kernel(t, t, {4.0, 1.0, 0.0});
  CHECK((g - g.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("kernel parameter validation") {
  CHECK_NOTHROW(RbfKernelParams{1.0, 1.0, 0.0}.validate());
  CHECK_THROWS_AS(RbfKernelParams({0.0, 1.0, 0.1}).validate(), InvalidInput);
  CHECK_THROWS_AS(RbfKernelParams({1.0, -1.0, 0.1}).validate(), InvalidInput);
  CHECK_THROWS_AS(RbfKernelParams({1.0, 1.0, -0.1}).validate(), InvalidInput);
  CHECK_THROWS_AS(RbfKernelParams({INFINITY, 1.0, 0.1}).validate(), InvalidInput);
}

TEST_CASE("posterior mean matches a direct dense solve") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = testing::uniform_int(rng, 1, 40);
    const int c = testing::uniform_int(rng, 1, 6);
    const RbfKernelParams p{testing::uniform_real(rng, 0.5, 6.0), testing::uniform_real(rng, 0.2, 2.0),
                            testing::uniform_real(rng, 1e-3, 0.5)};
    const Eigen::VectorXd t = increasing_times(rng, n, 0.5, 3.0);
    const Eigen::MatrixXd y = testing::random_matrix(rng, c, n);
    const Eigen::VectorXd q = increasing_times(rng, 25, 0.3, 4.0);
    const GprModel model = GprModel::fit(t, y, p);
    CHECK(model.jitter() == 0.0);
    const Eigen::MatrixXd ours = model.posterior_mean(q);
    const Eigen::MatrixXd ref = direct_posterior(t, y, q, p);
    CHECK((ours - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
  }
}

TEST_CASE("noise-free posterior interpolates the training targets") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = testing::uniform_int(rng, 2, 100);
    const Eigen::VectorXd t = increasing_times(rng, n, 1.0, 3.0);
    const Eigen::MatrixXd y = testing::random_matrix(rng, 8, n);
    const GprModel model = GprModel::fit(t, y, {testing::uniform_real(rng, 0.5, 1.5), 1.0, 0.0});
    const Eigen::MatrixXd at_train = model.posterior_mean(t);
    CHECK((at_train - y).norm() <= 1e-6 * y.norm());
  }
}

TEST_CASE("gpr_predict keeps training columns verbatim") {
  Eigen::VectorXd t(3);
  t << 0.0, 5.0, 9.0;
  Eigen::MatrixXd y(2, 3);
  y << 1.0, 0.0, 1.0,
       0.0, 1.0, 0.0;
  const GprModel model = gpr_fit(t, y, {3.0, 1.0, 0.1});
  Eigen::VectorXd q(4);
  q << 0.0, 2.0, 5.0, 9.0;
  const InterpolatedLabels out = gpr_predict(model, q);
  CHECK(out.source == InterpolationSource::kGpr);
  CHECK(out.values.col(0) == y.col(0));
  CHECK(out.values.col(2) == y.col(1));
  CHECK(out.values.col(3) == y.col(2));
  CHECK(out.values.col(1) != model.posterior_mean(q).col(0));
}

TEST_CASE("posterior mean is shift invariant and linear in the targets") {
  std::mt19937_64 rng(4);
  const Eigen::VectorXd t = increasing_times(rng, 30, 0.5, 2.0);
  const Eigen::MatrixXd y = testing::random_matrix(rng, 4, 30);
  const Eigen::VectorXd q = increasing_times(rng, 40, 0.2, 1.5);
  const RbfKernelParams p{3.0, 1.0, 0.05};
  const Eigen::MatrixXd base = GprModel::fit(t, y, p).posterior_mean(q);

  const double shift = 123.25;
  const Eigen::VectorXd ts = t.array() + shift;
  const Eigen::VectorXd qs = q.array() + shift;
  CHECK((GprModel::fit(ts, y, p).posterior_mean(qs) - base).norm() <= 1e-9 * base.norm());

  for (double alpha : {-2.0, 0.5, 7.0}) {
    const Eigen::MatrixXd scaled = GprModel::fit(t, alpha * y, p).posterior_mean(q);
    CHECK((scaled - alpha * base).norm() <= 1e-10 * std::abs(alpha) * base.norm());
  }
}

TEST_CASE("two distant observations switch the argmax exactly once") {
  Eigen::VectorXd t(2);
  t << 0.0, 100.0;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 2);
  y(0, 0) = 1.0;
  y(2, 1) = 1.0;
  const GprModel model = GprModel::fit(t, y, {20.0, 1.0, 1e-2});
  Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(1001, 0.0, 100.0);
  const ClassVector cls = decode_labels(model.posterior_mean(q));
  int switches = 0;
  for (std::size_t i = 1; i < cls.size(); ++i) switches += cls[i] != cls[i - 1];
  CHECK(switches == 1);
  CHECK(cls.front() == 0);
  CHECK(cls.back() == 2);
}

TEST_CASE("times must be strictly increasing") {
  Eigen::VectorXd t(3);
  t << 0.0, 1.0, 1.0;
  CHECK_THROWS_AS(GprModel::fit(t, Eigen::MatrixXd::Ones(1, 3), {}), InvalidInput);
  CHECK_THROWS_AS(GprModel::fit(Eigen::VectorXd(0), Eigen::MatrixXd(1, 0), {}), InvalidInput);
  CHECK_THROWS_AS(GprModel::fit(Eigen::VectorXd::LinSpaced(3, 0, 2), Eigen::MatrixXd::Ones(1, 2), {}),
                  ShapeMismatch);
}

TEST_CASE("jitter escalates on a near-singular gram matrix") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(40, 0.0, 39.0);
  const GprModel model = GprModel::fit(t, Eigen::MatrixXd::Ones(2, 40), {500.0, 1.0, 0.0});
  CHECK(model.jitter() >= 1e-8);
  CHECK(model.jitter() <= 1e-2);
  CHECK(model.posterior_mean(t).allFinite());
}

TEST_CASE("log marginal likelihood matches the closed form") {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd t = increasing_times(rng, 15, 0.5, 2.0);
  const Eigen::MatrixXd y = testing::random_matrix(rng, 3, 15);
  const RbfKernelParams p{2.0, 0.8, 0.1};
  Eigen::MatrixXd k = rbf_kernel(t, t, p);
  k.diagonal().array() += p.noise_variance;
  const double logdet = std::log(k.determinant());
  double expected = 0.0;
  for (int r = 0; r < 3; ++r) {
    const Eigen::VectorXd row = y.row(r).transpose();
    expected += -0.5 * row.dot(k.fullPivLu().solve(row)) - 0.5 * logdet -
                0.5 * 15.0 * std::log(2.0 * M_PI);
  }
  CHECK(GprModel::fit(t, y, p).log_marginal_likelihood() == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("hyperparameter selection") {
  const auto grid = default_kernel_grid();
  CHECK(grid.size() == 30);

  SUBCASE("single grid point is returned") {
    const std::vector<RbfKernelParams> one{{7.0, 0.5, 0.01}};
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
    CHECK(fit_kernel_hyperparams(t, Eigen::MatrixXd::Random(2, 10), one) == one[0]);
  }

  SUBCASE("recovers the length scale of GP-drawn data") {
    const int n = 200;
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, n - 1.0);
    Eigen::MatrixXd cov = rbf_kernel(t, t, {10.0, 1.0, 0.0});
    cov.diagonal().array() += 1e-6;
    const Eigen::MatrixXd l = cov.llt().matrixL();
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd y = (l * testing::random_matrix(rng, n, 8)).transpose();
    const RbfKernelParams best = fit_kernel_hyperparams(t, y, grid);
    CHECK(best.length_scale >= 5.0);
    CHECK(best.length_scale <= 20.0);
  }

  SUBCASE("white noise selects the largest noise variance") {
    std::mt19937_64 rng(7);
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(120, 0.0, 119.0);
    const Eigen::MatrixXd y = testing::random_matrix(rng, 8, 120);
    CHECK(fit_kernel_hyperparams(t, y, grid).noise_variance == 0.1);
  }

  CHECK_THROWS_AS(fit_kernel_hyperparams(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1),
                                         std::vector<RbfKernelParams>{}),
                  InvalidInput);
}

namespace {

LabelMatrix sparse_labels(int classes, int length, const std::vector<std::pair<int, int>>& obs) {
  LabelMatrix lm;
  lm.values = Eigen::MatrixXd::Zero(classes, length);
  lm.observed.assign(static_cast<std::size_t>(length), false);
  for (auto [t, k] : obs) {
    lm.values(k, t) = 1.0;
    lm.observed[static_cast<std::size_t>(t)] = true;
  }
  return lm;
}

}  // namespace

TEST_CASE("gpr_interpolate fills every column and keeps the observed ones") {
  const LabelMatrix lm = sparse_labels(4, 60, {{3, 1}, {20, 2}, {41, 0}, {59, 3}});
  const InterpolatedLabels out = gpr_interpolate(lm, {8.0, 1.0, 1e-2});
  CHECK(out.values.rows() == 4);
  CHECK(out.values.cols() == 60);
  for (int t : {3, 20, 41, 59}) CHECK(out.values.col(t) == lm.values.col(t));
  CHECK(observed_times(lm) == Eigen::Vector4d(3, 20, 41, 59));
  CHECK_THROWS_AS(gpr_interpolate(sparse_labels(4, 10, {}), {}), InvalidInput);
}

TEST_CASE("laplacian smoothing solves its normal equations") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int T = testing::uniform_int(rng, 2, 30);
    const int c = 3;
    std::vector<std::pair<int, int>> obs;
    for (int t = 0; t < T; ++t) {
      if (t == 0 || testing::uniform_real(rng, 0.0, 1.0) < 0.3) obs.push_back({t, testing::uniform_int(rng, 0, c - 1)});
    }
    const LabelMatrix lm = sparse_labels(c, T, obs);
    const double w = testing::uniform_real(rng, 0.05, 20.0);
    const Eigen::MatrixXd z = laplacian_smooth(lm, w).values;

    // (D + w L) z^T = D y^T with D the observed diagonal and L the path Laplacian.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(T, T);
    for (int t = 0; t < T; ++t) a(t, t) = lm.observed[static_cast<std::size_t>(t)] ? 1.0 : 0.0;
    for (int t = 0; t + 1 < T; ++t) {
      a(t, t) += w;
      a(t + 1, t + 1) += w;
      a(t, t + 1) -= w;
      a(t + 1, t) -= w;
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(T, c);
    for (auto [t, k] : obs) rhs(t, k) = 1.0;
    const Eigen::MatrixXd ref = a.fullPivLu().solve(rhs).transpose();
    CHECK((z - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("laplacian smoothing limits") {
  SUBCASE("vanishing weight on full data is the identity") {
    std::vector<std::pair<int, int>> obs;
    for (int t = 0; t < 12; ++t) obs.push_back({t, t % 3});
    const LabelMatrix lm = sparse_labels(3, 12, obs);
    CHECK((laplacian_smooth(lm, 1e-9).values - lm.values).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("two observations give a linear ramp between them") {
    const LabelMatrix lm = sparse_labels(2, 21, {{0, 0}, {20, 1}});
    const Eigen::MatrixXd z = laplacian_smooth(lm, 1e4).values;
    for (int t = 1; t < 20; ++t) {
      CHECK(std::abs(z(0, t + 1) - 2.0 * z(0, t) + z(0, t - 1)) < 1e-9);
    }
    CHECK(z(0, 0) > z(0, 20));
  }
  SUBCASE("a single observation extends as a constant") {
    const LabelMatrix lm = sparse_labels(3, 15, {{6, 2}});
    const Eigen::MatrixXd z = laplacian_smooth(lm, 2.0).values;
    for (int t = 0; t < 15; ++t) CHECK(z.col(t).isApprox(lm.values.col(6)));
  }
  CHECK_THROWS_AS(laplacian_smooth(sparse_labels(3, 5, {{0, 0}}), 0.0), InvalidInput);
}

TEST_CASE("linear interpolation") {
  const LabelMatrix lm = sparse_labels(2, 11, {{2, 0}, {6, 1}});
  const Eigen::MatrixXd z = linear_interpolate(lm).values;
  CHECK(z(0, 4) == doctest::Approx(0.5));
  CHECK(z(1, 5) == doctest::Approx(0.75));
  CHECK(z.col(0) == lm.values.col(2));
  CHECK(z.col(10) == lm.values.col(6));
  CHECK(linear_interpolate(lm).source == InterpolationSource::kLinear);
}
