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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "hbpe/error.hpp"
#include "hbpe/pose_labels.hpp"
#include "support.hpp"

using namespace hbpe;

TEST_CASE("angle_to_class sectors and wrap-around") {
  CHECK(angle_to_class(0.0).index == 0);
  CHECK(angle_to_class(44.999).index == 0);
  CHECK(angle_to_class(45.0).index == 1);
  CHECK(angle_to_class(359.9).index == 7);
  CHECK(angle_to_class(360.0).index == 0);
  CHECK(angle_to_class(-10.0).index == 7);
  CHECK(angle_to_class(725.0).index == 0);
  CHECK(angle_to_class(100.0, 4).index == 1);
  CHECK(angle_to_class(22.5).center_deg() == doctest::Approx(22.5));
  CHECK_THROWS_AS(angle_to_class(10.0, 1), InvalidInput);
  CHECK_THROWS_AS(angle_to_class(NAN), InvalidInput);
}

TEST_CASE("encode then decode recovers the class for c = 2..16") {
  std::mt19937_64 rng(11);
  for (int c = 2; c <= 16; ++c) {
    Eigen::MatrixXd block(c, 200);
    std::vector<int> expected;
    for (int t = 0; t < 200; ++t) {
      const double angle = testing::uniform_real(rng, -720.0, 720.0);
      const Eigen::VectorXd v = encode_angle(angle, c);
      CHECK(v.sum() == 1.0);
      CHECK(v.maxCoeff() == 1.0);
      block.col(t) = v;
      expected.push_back(angle_to_class(angle, c).index);
    }
    CHECK(decode_labels(block) == expected);
  }
}

TEST_CASE("decode breaks ties toward the lowest index") {
  Eigen::MatrixXd y(3, 3);
  y << 0.5, 0.0, 0.2,
       0.5, 0.0, 0.7,
       0.0, 0.0, 0.7;
  CHECK(decode_labels(y) == ClassVector{0, 0, 1});
}

TEST_CASE("entropy values") {
  std::vector<int> uniform(800);
  for (int i = 0; i < 800; ++i) uniform[static_cast<std::size_t>(i)] = i % 8;
  const EntropyReport u = label_entropy(uniform, 8);
  CHECK(u.value == doctest::Approx(std::log(8.0)).epsilon(1e-12));
  CHECK(std::abs(u.value - 2.0794) < 1e-3);
  CHECK(u.class_proportions.size() == 8);

  std::vector<int> single(50, 3);
  CHECK(label_entropy(single, 8).value == 0.0);

  std::vector<int> half{0, 1, 0, 1};
  CHECK(label_entropy(half, 2).value == doctest::Approx(std::log(2.0)));

  std::vector<int> bad{0, 9};
  CHECK_THROWS_AS(label_entropy(bad, 8), InvalidInput);
  CHECK_THROWS_AS(label_entropy(std::vector<int>{}, 8), InvalidInput);
}

TEST_CASE("label matrix from classes is one-hot only at the mask") {
  ClassVector truth{2, 0, 1, 1, 2};
  ObservationMask mask{{1, 3}, 5, 0.4, 0};
  const LabelMatrix lm = LabelMatrix::from_classes(truth, 3, mask);
  CHECK(lm.classes() == 3);
  CHECK(lm.length() == 5);
  CHECK(lm.observed_indices() == std::vector<int>{1, 3});
  CHECK(lm.values(0, 1) == 1.0);
  CHECK(lm.values(1, 3) == 1.0);
  CHECK(lm.values.col(0).isZero());
  CHECK(lm.values.col(4).isZero());
  CHECK(lm.values.sum() == 2.0);
}

namespace {

std::vector<int> varied_labels(int length, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> out;
  int current = 0;
  for (int t = 0; t < length; ++t) {
    if (t % 25 == 0) current = testing::uniform_int(rng, 0, classes - 1);
    out.push_back(current);
  }
  return out;
}

}  // namespace

TEST_CASE("mask size, order and determinism") {
  const auto labels = varied_labels(645, 8, 3);
  const ObservationMask a = generate_mask(645, 0.05, labels, 42);
  CHECK(a.indices.size() == 32);
  CHECK(std::is_sorted(a.indices.begin(), a.indices.end()));
  CHECK(std::set<int>(a.indices.begin(), a.indices.end()).size() == 32);
  CHECK(a.indices.front() >= 0);
  CHECK(a.indices.back() < 645);

  const ObservationMask b = generate_mask(645, 0.05, labels, 42);
  CHECK(a.indices == b.indices);
  const ObservationMask c = generate_mask(645, 0.05, labels, 43);
  CHECK(a.indices != c.indices);

  const auto obs = a.observed();
  const auto un = a.unobserved();
  CHECK(std::count(obs.begin(), obs.end(), true) == 32);
  for (std::size_t t = 0; t < obs.size(); ++t) CHECK(obs[t] != un[t]);
}

TEST_CASE("mask draws meet the diversity threshold") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto labels = varied_labels(600, 8, seed);
    const double full = label_entropy(labels, 8).value;
    const ObservationMask m = generate_mask(600, 0.05, labels, seed * 7 + 1);
    std::vector<int> drawn;
    for (int i : m.indices) drawn.push_back(labels[static_cast<std::size_t>(i)]);
    CHECK(label_entropy(drawn, 8).value >= 0.75 * full - 1e-12);
  }
}

TEST_CASE("mask edge cases") {
  const auto labels = varied_labels(10, 3, 1);
  SUBCASE("tiny fractions still draw one column") {
    std::vector<int> flat(10, 2);
    CHECK(generate_mask(10, 0.01, flat, 1).indices.size() == 1);
  }
  SUBCASE("fraction one observes everything") {
    const ObservationMask m = generate_mask(10, 1.0, labels, 1);
    CHECK(m.indices.size() == 10);
    const auto un = m.unobserved();
    CHECK(std::none_of(un.begin(), un.end(), [](bool b) { return b; }));
  }
  SUBCASE("unreachable diversity is reported with the best entropy") {
    std::vector<int> two(10, 0);
    two[9] = 1;
    try {
      generate_mask(10, 0.1, two, 5, MaskOptions{0.75, 20});
      FAIL("expected DiversityUnsatisfiable");
    } catch (const DiversityUnsatisfiable& e) {
      CHECK(e.best_entropy() == 0.0);
    }
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(generate_mask(10, 0.0, labels, 1), InvalidInput);
    CHECK_THROWS_AS(generate_mask(10, 1.5, labels, 1), InvalidInput);
    CHECK_THROWS_AS(generate_mask(11, 0.5, labels, 1), ShapeMismatch);
  }
}

TEST_CASE("accuracy counts only evaluated columns") {
  const ClassVector truth{0, 1, 2, 3, 4, 5};
  ClassVector pred{0, 1, 0, 3, 0, 5};
  const std::vector<bool> eval{false, true, true, true, false, false};
  CHECK(accuracy(pred, truth, eval) == doctest::Approx(2.0 / 3.0));
  CHECK(correct_count(pred, truth, eval) == 2);

  // Changing predictions outside the evaluation set never moves the score.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    ClassVector noisy = pred;
    for (std::size_t t = 0; t < noisy.size(); ++t) {
      if (!eval[t]) noisy[t] = testing::uniform_int(rng, 0, 7);
    }
    CHECK(accuracy(noisy, truth, eval) == accuracy(pred, truth, eval));
  }

  CHECK_THROWS_AS(accuracy(pred, truth, std::vector<bool>(6, false)), UndefinedMetric);
  CHECK_THROWS_AS(accuracy(ClassVector{0}, truth, eval), ShapeMismatch);
}
