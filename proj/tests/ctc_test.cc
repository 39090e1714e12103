// tests/ctc_test.cc

// Copyright 2026  The ctc-curriculum Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <doctest.h>

#include "curriculum/ctc.h"
#include "oracles.h"

using namespace curriculum;

namespace {

PosteriorLattice lattice_from(std::initializer_list<std::initializer_list<double>> rows) {
  RowMatrix m(static_cast<Eigen::Index>(rows.size()),
              static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index t = 0;
  for (const auto& r : rows) {
    Eigen::Index k = 0;
    for (double v : r) m(t, k++) = v;
    ++t;
  }
  return {m};
}

}  // namespace

TEST_CASE("ctc_nll: single frame, single label") {
  // labels {a, b, blank}
  const auto lat = lattice_from({{0.7, 0.2, 0.1}});
  CHECK(ctc_nll(lat, {0}) == doctest::Approx(-std::log(0.7)).epsilon(1e-14));
  CHECK(ctc_nll(lat, {0}) == doctest::Approx(0.35667494393873245));
}

TEST_CASE("ctc_nll: two frames, one label sums the three collapsing paths") {
  const auto lat = lattice_from({{0.5, 0.2, 0.3}, {0.4, 0.1, 0.5}});
  const double expected = 0.5 * 0.4 + 0.5 * 0.5 + 0.3 * 0.4;
  CHECK(static_cast<double>(oracle::brute_force_likelihood(lat, {0})) ==
        doctest::Approx(expected).epsilon(1e-15));
  CHECK(std::exp(-ctc_nll(lat, {0})) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("ctc_nll: empty target is the all-blank path") {
  const auto lat = lattice_from({{0.5, 0.2, 0.3}, {0.4, 0.1, 0.5}, {0.1, 0.1, 0.8}});
  CHECK(std::exp(-ctc_nll(lat, {})) ==
        doctest::Approx(0.3 * 0.5 * 0.8).epsilon(1e-14));
}

TEST_CASE("ctc_nll: repeated labels need a separating blank") {
  const auto lat = lattice_from({{0.6, 0.1, 0.3}, {0.6, 0.1, 0.3}});
  CHECK(min_frames({0, 0}) == 3);
  CHECK(min_frames({0, 1, 1, 1}) == 6);
  CHECK_THROWS_AS(ctc_nll(lat, {0, 0}), InfeasibleTarget);
  CHECK_THROWS_AS(ctc_grad(lat, {0, 0}), InfeasibleTarget);
  try {
    ctc_nll(lat, {0, 1, 0});
    FAIL("expected InfeasibleTarget");
  } catch (const InfeasibleTarget& e) {
    CHECK(e.frames() == 2);
    CHECK(e.required() == 3);
  }
}

TEST_CASE("ctc_nll: zero-probability targets give +inf, not an error") {
  const auto lat = lattice_from({{0.0, 0.5, 0.5}});
  const double nll = ctc_nll(lat, {0});
  CHECK(std::isinf(nll));
  CHECK(nll > 0);
}

TEST_CASE("ctc_nll: labels outside the alphabet are rejected") {
  const auto lat = lattice_from({{0.7, 0.2, 0.1}});
  CHECK_THROWS_AS(ctc_nll(lat, {2}), std::invalid_argument);  // the blank
  CHECK_THROWS_AS(ctc_nll(lat, {-1}), std::invalid_argument);
}

TEST_CASE("ctc_nll matches path enumeration on random lattices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + trial % 5;
    const int N = 2 + trial % 3;
    const auto lat = oracle::random_lattice(T, N, rng);
    const auto y = oracle::random_feasible_target(T, N, rng);
    const long double ref = oracle::brute_force_likelihood(lat, y);
    CHECK(std::abs(std::exp(-ctc_nll(lat, y)) - static_cast<double>(ref)) < 1e-12);
  }
}

TEST_CASE("ctc_nll stays finite on tiny probabilities") {
  // Every entry is 1e-30 except the blank, which holds the remaining mass.
  const int T = 5, N = 4;
  RowMatrix p = RowMatrix::Constant(T, N, 1e-30);
  p.col(N - 1).setConstant(1.0 - 3e-30);
  const PosteriorLattice lat{p};
  const LabelSequence y = {0, 1, 1};
  const double nll = ctc_nll(lat, y);
  REQUIRE(std::isfinite(nll));
  const long double ref = oracle::brute_force_likelihood(lat, y);
  CHECK(nll == doctest::Approx(-static_cast<double>(std::log(ref))).epsilon(1e-12));
}

TEST_CASE("ctc_grad: single frame reduces to softmax minus one-hot") {
  const auto lat = lattice_from({{0.7, 0.2, 0.1}});
  const RowMatrix g = ctc_grad(lat, {0});
  CHECK(g(0, 0) == doctest::Approx(0.7 - 1.0));
  CHECK(g(0, 1) == doctest::Approx(0.2));
  CHECK(g(0, 2) == doctest::Approx(0.1));
}

TEST_CASE("ctc_grad: rows sum to zero") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto lat = oracle::random_lattice(8, 5, rng);
    const auto y = oracle::random_feasible_target(8, 5, rng);
    const RowMatrix g = ctc_grad(lat, y);
    for (int t = 0; t < 8; ++t) CHECK(std::abs(g.row(t).sum()) < 1e-9);
  }
}

TEST_CASE("ctc_grad: palindrome on a uniform lattice is time-symmetric") {
  const int T = 7, N = 4;
  const PosteriorLattice lat{RowMatrix::Constant(T, N, 1.0 / N)};
  const RowMatrix g = ctc_grad(lat, {0, 1, 0});
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < N; ++k) CHECK(g(t, k) == doctest::Approx(g(T - 1 - t, k)));
}

TEST_CASE("ctc_grad agrees with central differences of the activations") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 2 + trial % 5, N = 3 + trial % 3;
    std::normal_distribution<double> g(0.0, 1.5);
    Eigen::VectorXd z(T * N);
    for (auto& v : z) v = g(rng);
    const auto y = oracle::random_feasible_target(T, N, rng);
    const auto nll_of = [&](const Eigen::VectorXd& x) {
      RowMatrix zm = Eigen::Map<const RowMatrix>(x.data(), T, N);
      return ctc_nll(PosteriorLattice{oracle::softmax_rows(zm)}, y);
    };
    RowMatrix zm = Eigen::Map<const RowMatrix>(z.data(), T, N);
    const RowMatrix grad = ctc_grad(PosteriorLattice{oracle::softmax_rows(zm)}, y);
    for (int k = 0; k < T * N; ++k) {
      const double fd = oracle::central_difference(nll_of, z, k, 1e-6);
      CHECK(oracle::relative_error(grad.data()[k], fd, 1e-4) < 1e-4);
    }
  }
}

TEST_CASE("best_path_decode collapses repeats and drops blanks") {
  // labels {a=0, b=1, blank=2}
  const auto aab = lattice_from({{0.8, 0.1, 0.1}, {0.6, 0.1, 0.3}, {0.1, 0.1, 0.8}, {0.1, 0.7, 0.2}});
  CHECK(best_path_decode(aab) == LabelSequence{0, 1});
  const auto blanks = lattice_from({{0.1, 0.1, 0.8}, {0.2, 0.1, 0.7}});
  CHECK(best_path_decode(blanks).empty());
  const auto aba = lattice_from({{0.8, 0.1, 0.1}, {0.1, 0.1, 0.8}, {0.7, 0.1, 0.2}});
  CHECK(best_path_decode(aba) == LabelSequence{0, 0});
}

TEST_CASE("best_path_decode breaks ties toward the lowest label id") {
  const auto tie = lattice_from({{0.4, 0.4, 0.2}, {0.2, 0.4, 0.4}});
  CHECK(best_path_decode(tie) == LabelSequence{0, 1});
}

TEST_CASE("validate_lattice") {
  CHECK_NOTHROW(validate_lattice(lattice_from({{0.5, 0.5}})));
  CHECK_THROWS(validate_lattice(lattice_from({{0.5, 0.6}})));
  CHECK_THROWS(validate_lattice(lattice_from({{1.0}})));
  CHECK_THROWS(validate_lattice(lattice_from({{1.5, -0.5}})));
}
