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
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>

#include "hbpe/checkpoint.hpp"
#include "hbpe/error.hpp"
#include "hbpe/matrix_completion.hpp"
#include "support.hpp"

using namespace hbpe;
using testing::random_matrix;

TEST_CASE("heterogeneous matrix layout") {
  std::mt19937_64 rng(1);
  ClassVector truth(645);
  for (int t = 0; t < 645; ++t) truth[static_cast<std::size_t>(t)] = (t / 40) % 8;
  ObservationMask mask{{0, 10, 100, 644}, 645, 0.05, 0};
  const LabelMatrix lm = LabelMatrix::from_classes(truth, 8, mask);
  const Eigen::MatrixXd x = random_matrix(rng, 100, 645);

  const HeterogeneousMatrix j = build_heterogeneous(lm, x);
  CHECK(j.rows() == 109);
  CHECK(j.length() == 645);
  CHECK(j.label_block() == lm.values);
  CHECK(j.feature_block() == x);
  CHECK((j.bias_row().array() == 1.0).all());
  CHECK(j.label_block().col(5).isZero());

  const Eigen::MatrixXd soft = Eigen::MatrixXd::Constant(8, 645, 0.125);
  const HeterogeneousMatrix js = build_heterogeneous(lm, x, soft);
  CHECK(js.label_block().col(5) == soft.col(5));
  CHECK(js.label_block().col(10) == lm.values.col(10));

  CHECK_THROWS_AS(build_heterogeneous(lm, random_matrix(rng, 100, 644)), ShapeMismatch);
  CHECK_THROWS_AS(build_anchor(Eigen::MatrixXd::Zero(8, 3), x), ShapeMismatch);
  CHECK(build_anchor(soft, x).data.topRows(8) == soft);
}

TEST_CASE("label projection and its adjoint") {
  std::mt19937_64 rng(2);
  const LabelProjection p{3, 7};
  const Eigen::MatrixXd j = random_matrix(rng, 7, 5);
  const Eigen::MatrixXd y = random_matrix(rng, 3, 5);
  CHECK(p.dense().rows() == 3);
  CHECK(p.dense().cols() == 7);
  CHECK((p.apply(j) - p.dense() * j).norm() == 0.0);
  CHECK((p.adjoint(y) - p.dense().transpose() * y).norm() == 0.0);
  // <P j, y> == <j, P^T y>
  CHECK((p.apply(j).array() * y.array()).sum() ==
        doctest::Approx((j.array() * p.adjoint(y).array()).sum()));
}

TEST_CASE("svt on a diagonal matrix soft-thresholds the diagonal") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 4);
  a(0, 0) = 5.0;
  a(1, 1) = 3.0;
  a(2, 2) = 0.5;
  double nuc = 0.0;
  const Eigen::MatrixXd out = svt(a, 1.0, &nuc);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 4);
  expected(0, 0) = 4.0;
  expected(1, 1) = 2.0;
  CHECK((out - expected).norm() < 1e-12);
  CHECK(nuc == doctest::Approx(6.0));
  CHECK(nuclear_norm(a) == doctest::Approx(8.5));
  CHECK(svt(a, 10.0).norm() == 0.0);
}

TEST_CASE("svt is the nuclear-norm proximal operator") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int rows = testing::uniform_int(rng, 1, 9);
    const int cols = testing::uniform_int(rng, 1, 9);
    const Eigen::MatrixXd a = random_matrix(rng, rows, cols, 2.0);
    const double tau = testing::uniform_real(rng, 0.0, 3.0);
    const Eigen::MatrixXd x = svt(a, tau);
    const double best = testing::prox_objective(x, a, tau);
    CHECK(best <= testing::prox_objective(a, a, tau) + 1e-12);
    for (int k = 0; k < 100; ++k) {
      const Eigen::MatrixXd d = random_matrix(rng, rows, cols);
      CHECK(best <= testing::prox_objective(x + 1e-2 * d / d.norm(), a, tau) + 1e-12);
    }
    CHECK((svt(a, 0.0) - a).norm() <= 1e-10 * (1.0 + a.norm()));
  }
}

TEST_CASE("svt input checks") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(svt(a, -1.0), InvalidInput);
  a(0, 1) = NAN;
  CHECK_THROWS_AS(svt(a, 1.0), NumericalError);
}

TEST_CASE("update_J minimizes its subproblem") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd k = random_matrix(rng, 6, 11);
  const Eigen::MatrixXd m = random_matrix(rng, 6, 11);
  const double nu = 0.7, phi = 1.9;
  const Eigen::MatrixXd j = update_J(k, m, nu, phi);
  CHECK((j - svt(k - m / phi, nu / phi)).norm() == 0.0);
  auto f = [&](const Eigen::MatrixXd& x) {
    return nu * nuclear_norm(x) + 0.5 * phi * (m / phi + x - k).squaredNorm();
  };
  const double best = f(j);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd d = random_matrix(rng, 6, 11);
    CHECK(best <= f(j + 1e-2 * d / d.norm()) + 1e-12);
  }
  CHECK_THROWS_AS(update_J(k, m, nu, 0.0), InvalidInput);
}

TEST_CASE("update_K is stationary and matches the generic dense solve") {
  std::mt19937_64 rng(5);
  for (AnchorScope scope : {AnchorScope::kAllRows, AnchorScope::kLabelRows}) {
    CAPTURE(to_string(scope));
    for (int trial = 0; trial < 15; ++trial) {
      const int c = testing::uniform_int(rng, 2, 5);
      const int n = c + testing::uniform_int(rng, 1, 4) + 1;
      const int t = testing::uniform_int(rng, 1, 8);
      const SolverWeights w{1.0, 1.0, testing::uniform_real(rng, 0.0, 5.0),
                            testing::uniform_real(rng, 0.0, 5.0), testing::uniform_real(rng, 0.0, 20.0),
                            testing::uniform_real(rng, 0.1, 3.0), testing::uniform_real(rng, 0.1, 3.0)};
      const auto jh = random_matrix(rng, n, t), jb = random_matrix(rng, n, t);
      const auto ah = random_matrix(rng, n, t), ab = random_matrix(rng, n, t);
      const auto mh = random_matrix(rng, n, t), mb = random_matrix(rng, n, t);
      const KUpdate k = update_K(jh, jb, ah, ab, mh, mb, w, c, scope);
      const KUpdate g = testing::k_gradient(k, jh, jb, ah, ab, mh, mb, w, c, scope);
      CHECK(std::sqrt(g.head.squaredNorm() + g.body.squaredNorm()) <= 1e-8);
      const KUpdate ref = testing::dense_k_solve(jh, jb, ah, ab, mh, mb, w, c, scope);
      CHECK((k.head - ref.head).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((k.body - ref.body).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("update_K row behaviour") {
  std::mt19937_64 rng(6);
  const int c = 3, n = 6, t = 4;
  const auto jh = random_matrix(rng, n, t), jb = random_matrix(rng, n, t);
  const auto ah = random_matrix(rng, n, t), ab = random_matrix(rng, n, t);
  const auto mh = random_matrix(rng, n, t), mb = random_matrix(rng, n, t);
  SolverWeights w;

  SUBCASE("label-row scope leaves feature rows at J + M/phi") {
    const KUpdate k = update_K(jh, jb, ah, ab, mh, mb, w, c, AnchorScope::kLabelRows);
    CHECK((k.head.bottomRows(n - c) - (jh + mh / w.phi_h).bottomRows(n - c)).norm() < 1e-14);
  }
  SUBCASE("all-row scope blends feature rows toward the anchor") {
    const KUpdate k = update_K(jh, jb, ah, ab, mh, mb, w, c, AnchorScope::kAllRows);
    const Eigen::MatrixXd expected = (w.lambda_h * ah + w.phi_h * jh + mh) / (w.lambda_h + w.phi_h);
    CHECK((k.head.bottomRows(n - c) - expected.bottomRows(n - c)).norm() < 1e-14);
  }
  SUBCASE("large coupling pulls the label rows together") {
    w.mu = 1e9;
    const KUpdate k = update_K(jh, jb, ah, ab, mh, mb, w, c);
    CHECK((k.head.topRows(c) - k.body.topRows(c)).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("zero coupling decouples the streams") {
    w.mu = 0.0;
    const KUpdate k1 = update_K(jh, jb, ah, ab, mh, mb, w, c);
    const KUpdate k2 = update_K(jh, random_matrix(rng, n, t), ah, random_matrix(rng, n, t), mh,
                                random_matrix(rng, n, t), w, c);
    CHECK(k1.head == k2.head);
  }
  CHECK_THROWS_AS(update_K(jh, random_matrix(rng, n, t + 1), ah, ab, mh, mb, w, c), ShapeMismatch);
}

TEST_CASE("multiplier updates accumulate") {
  std::mt19937_64 rng(7);
  const auto m = random_matrix(rng, 4, 5);
  const auto j1 = random_matrix(rng, 4, 5), k1 = random_matrix(rng, 4, 5);
  const auto j2 = random_matrix(rng, 4, 5), k2 = random_matrix(rng, 4, 5);
  const double phi = 1.7;
  CHECK((update_multipliers(m, j1, k1, phi) - (m + phi * (j1 - k1))).norm() < 1e-14);
  const auto twice = update_multipliers(update_multipliers(m, j1, k1, phi), j2, k2, phi);
  CHECK((twice - (m + phi * (j1 - k1 + j2 - k2))).norm() < 1e-13);
  CHECK(update_multipliers(m, j1, j1, phi) == m);
}

TEST_CASE("objective of rank-one iterates") {
  Eigen::VectorXd u(4), v(3);
  u << 1, 2, 0, 2;  // |u| = 3
  v << 0, 3, 4;     // |v| = 5
  const Eigen::MatrixXd jh = u * v.transpose();
  const Eigen::MatrixXd jb = 2.0 * jh;
  const Eigen::MatrixXd ah = Eigen::MatrixXd::Zero(4, 3);
  const Eigen::MatrixXd ab = jb;
  const SolverWeights w{0.5, 2.0, 3.0, 1.0, 4.0, 1.0, 1.0};
  const int c = 2;
  // nu terms: 0.5 * 15 + 2 * 30; anchors: head all rows |jh|^2 = 225; body 0.
  // coupling: |P(jh - jb)|^2 = |P jh|^2 = (1 + 4) * 25 = 125.
  const double all_rows = 0.5 * 15 + 2.0 * 30 + 1.5 * 225 + 2.0 * 125;
  CHECK(objective(jh, jb, ah, ab, w, c) == doctest::Approx(all_rows));
  const double label_rows = 0.5 * 15 + 2.0 * 30 + 1.5 * 125 + 2.0 * 125;
  CHECK(objective(jh, jb, ah, ab, w, c, AnchorScope::kLabelRows) == doctest::Approx(label_rows));
}

namespace {

SolveOptions limits(double tol, int max_iter, std::string checkpoint = {}, int every = 0) {
  SolveOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.checkpoint_path = std::move(checkpoint);
  o.checkpoint_every = every;
  return o;
}

SolveProblem random_problem(std::mt19937_64& rng, int c, int d, int t, int rank) {
  const Eigen::MatrixXd base = random_matrix(rng, c + d + 1, rank) * random_matrix(rng, rank, t);
  SolveProblem p;
  p.initial_h = {base, c, d};
  p.initial_b = {base + 0.1 * random_matrix(rng, c + d + 1, t), c, d};
  p.anchor_h = p.initial_h.data;
  p.anchor_b = p.initial_b.data;
  return p;
}

}  // namespace

TEST_CASE("consistent inputs are a fixed point") {
  std::mt19937_64 rng(8);
  const int c = 3, d = 4, t = 20;
  const Eigen::MatrixXd low = random_matrix(rng, c + d + 1, 2) * random_matrix(rng, 2, t);
  SolveProblem p;
  p.initial_h = p.initial_b = {low, c, d};
  p.anchor_h = p.anchor_b = low;
  const SolverWeights w{1e-9, 1e-9, 1.0, 1.0, 1.0, 1.0, 1.0};
  const SolveResult r = solve(p, w, limits(1e-6, 500));
  CHECK(r.report.converged);
  CHECK(r.report.iterations <= 2);
  CHECK(r.report.final_primal_residuals[0] < 1e-6);
  CHECK((r.completed_h.data - low).norm() < 1e-6 * low.norm());
}

TEST_CASE("solver converges and the objective settles") {
  std::mt19937_64 rng(9);
  const SolveProblem p = random_problem(rng, 4, 6, 40, 3);
  const SolverWeights w{0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0};
  const SolveResult r = solve(p, w, limits(1e-6, 2000));
  REQUIRE(r.report.converged);
  CHECK(r.report.objective_trace.size() == static_cast<std::size_t>(r.report.iterations));
  CHECK(r.completed_h.classes == 4);
  // The converged point beats nearby perturbations of the full objective.
  const double best = objective(r.completed_h.data, r.completed_b.data, p.anchor_h, p.anchor_b, w, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd dh = random_matrix(rng, 11, 40), db = random_matrix(rng, 11, 40);
    CHECK(best <= objective(r.completed_h.data + 1e-2 * dh / dh.norm(),
                            r.completed_b.data + 1e-2 * db / db.norm(), p.anchor_h, p.anchor_b, w,
                            4) + 1e-6);
  }
}

TEST_CASE("without coupling the head solution ignores the body stream") {
  std::mt19937_64 rng(10);
  SolveProblem p = random_problem(rng, 3, 4, 25, 2);
  const SolveOptions fixed = limits(1e-300, 40);  // run exactly 40 iterations
  for (double lambda : {0.0, 2.0}) {
    const SolverWeights w{0.3, 0.3, lambda, lambda, 0.0, 1.0, 1.0};
    const SolveResult a = solve(p, w, fixed);
    SolveProblem q = p;
    q.initial_b.data = random_matrix(rng, 8, 25, 5.0);
    q.anchor_b = random_matrix(rng, 8, 25, 5.0);
    const SolveResult b = solve(q, w, fixed);
    CHECK(a.completed_h.data == b.completed_h.data);
    CHECK(a.completed_b.data != b.completed_b.data);
  }
}

TEST_CASE("coupling gap shrinks as mu grows") {
  std::mt19937_64 rng(11);
  const SolveProblem p = random_problem(rng, 4, 5, 30, 3);
  double previous = INFINITY;
  for (double mu : {0.0, 1.0, 10.0, 100.0}) {
    const SolverWeights w{0.5, 0.5, 1.0, 1.0, mu, 1.0, 1.0};
    const SolveResult r = solve(p, w, limits(1e-8, 5000));
    CHECK(r.report.converged);
    const double gap = (r.completed_h.label_block() - r.completed_b.label_block()).norm();
    CHECK(gap <= previous * (1.0 + 1e-6));
    previous = gap;
  }
}

TEST_CASE("non-finite data is a numerical failure") {
  std::mt19937_64 rng(12);
  SolveProblem p = random_problem(rng, 2, 2, 5, 1);
  p.anchor_h(0, 0) = NAN;
  try {
    solve(p, SolverWeights{}, {});
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumerical);
  }
}

TEST_CASE("solver argument validation") {
  std::mt19937_64 rng(13);
  SolveProblem p = random_problem(rng, 2, 2, 5, 1);
  CHECK_THROWS_AS(solve(p, SolverWeights{0.0}, {}), InvalidInput);
  CHECK_THROWS_AS(solve(p, SolverWeights{}, limits(0.0, 10)), InvalidInput);
  CHECK_THROWS_AS(solve(p, SolverWeights{}, limits(1e-4, 0)), InvalidInput);
  p.anchor_b = random_matrix(rng, 5, 4);
  CHECK_THROWS_AS(solve(p, SolverWeights{}, {}), ShapeMismatch);
  CHECK(parse_anchor_scope("label_rows") == AnchorScope::kLabelRows);
  CHECK(to_string(AnchorScope::kAllRows) == "all_rows");
  CHECK_THROWS_AS(parse_anchor_scope("some_rows"), InvalidInput);
}

TEST_CASE("checkpoints round-trip and resume exactly") {
  std::mt19937_64 rng(14);
  const SolveProblem p = random_problem(rng, 3, 3, 15, 2);
  const SolverWeights w{0.4, 0.4, 1.0, 1.0, 1.0, 1.0, 1.0};
  const auto dir = testing::scratch_dir("checkpoint");
  const std::string path = (dir / "state.ckpt").string();

  const SolveResult straight = solve(p, w, limits(1e-300, 60));
  const SolveResult partial = solve(p, w, limits(1e-300, 25, path, 5));
  const AdmmState loaded = load_checkpoint(path);
  CHECK(loaded.iteration == 25);
  CHECK(loaded.j_h == partial.state.j_h);
  CHECK(loaded.m_b == partial.state.m_b);
  CHECK(loaded.residuals.size() == partial.state.residuals.size());
  CHECK(loaded.residuals.back().dual_rel == partial.state.residuals.back().dual_rel);
  CHECK(loaded.objective_trace == partial.state.objective_trace);

  const SolveResult resumed = resume(p, loaded, w, limits(1e-300, 60));
  CHECK(resumed.report.iterations == 60);
  CHECK(resumed.completed_h.data == straight.completed_h.data);
  CHECK(resumed.completed_b.data == straight.completed_b.data);
  CHECK(resumed.report.objective_trace == straight.report.objective_trace);
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::mt19937_64 rng(15);
  const SolveProblem p = random_problem(rng, 2, 2, 6, 1);
  const auto dir = testing::scratch_dir("checkpoint_bad");
  const std::string good = (dir / "good.ckpt").string();
  save_checkpoint(good, solve(p, SolverWeights{}, limits(1e-300, 3)).state);

  std::ifstream in(good, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto write = [&](const std::string& name, const std::string& content) {
    const std::string path = (dir / name).string();
    std::ofstream(path, std::ios::binary) << content;
    return path;
  };
  std::string magic = bytes;
  magic[0] = 'X';
  std::string version = bytes;
  version[8] = 9;
  CHECK_THROWS_AS(load_checkpoint(write("magic", magic)), ParseError);
  CHECK_THROWS_AS(load_checkpoint(write("version", version)), ParseError);
  CHECK_THROWS_AS(load_checkpoint(write("short", bytes.substr(0, bytes.size() - 3))), ParseError);
  CHECK_THROWS_AS(load_checkpoint(write("long", bytes + "x")), ParseError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing").string()), IoError);
}
