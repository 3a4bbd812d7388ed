#include <doctest.h>

#include <cmath>

#include "descriptor_minimax/linalg.hpp"
#include "test_support.hpp"

using namespace dminimax;
using testing_support::Mat;
using testing_support::Vec;

TEST_CASE("pseudo_inverse of small matrices") {
  Mat a(1, 1);
  a << 2.0;
  CHECK(pseudo_inverse(a)(0, 0) == doctest::Approx(0.5));

  const Mat zero = Mat::Zero(2, 3);
  const Mat zinv = pseudo_inverse(zero);
  CHECK(zinv.rows() == 3);
  CHECK(zinv.cols() == 2);
  CHECK(zinv.norm() == 0.0);

  Mat projector(2, 2);
  projector << 1, 0, 0, 0;
  CHECK((pseudo_inverse(projector) - projector).norm() < 1e-15);
}

TEST_CASE("pseudo_inverse rejects bad input") {
  Mat a(1, 1);
  a << std::nan("");
  CHECK_THROWS_AS(pseudo_inverse(a), Error);
  Mat b = Mat::Identity(2, 2);
  CHECK_THROWS_AS(pseudo_inverse(b, 0.0), Error);
}

TEST_CASE("Penrose identities on random matrices up to 8x8") {
  testing_support::Rng rng(11);
  const double tol = kRankTolerance;
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = testing_support::random_dim(rng, 1, 8);
    const auto c = testing_support::random_dim(rng, 1, 8);
    Mat a = testing_support::random_matrix(rng, r, c);
    if (trial % 3 == 0 && r > 1) a.row(0) = a.row(r - 1);  // rank deficient
    const Mat ap = pseudo_inverse(a, tol);
    const double na = a.operatorNorm();
    const double nap = ap.operatorNorm();
    CHECK((a * ap * a - a).operatorNorm() <= 10 * tol * na);
    CHECK((ap * a * ap - ap).operatorNorm() <= 10 * tol * nap);
    CHECK(((a * ap).transpose() - a * ap).norm() <= 1e-10);
    CHECK(((ap * a).transpose() - ap * a).norm() <= 1e-10);
  }
}

TEST_CASE("solve_least_squares examples") {
  Mat a(1, 1);
  a << 1;
  Vec b(1);
  b << 3;
  auto r = solve_least_squares(a, b);
  CHECK(r.solution(0) == doctest::Approx(3));
  CHECK(r.residual_norm == doctest::Approx(0).epsilon(1e-14));

  Mat tall(2, 1);
  tall << 1, 1;
  Vec rhs(2);
  rhs << 0, 2;
  r = solve_least_squares(tall, rhs);
  CHECK(r.solution(0) == doctest::Approx(1.0));
  CHECK(r.residual_norm == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.rank_estimate == 1);

  Mat zero = Mat::Zero(1, 1);
  Vec one = Vec::Ones(1);
  r = solve_least_squares(zero, one);
  CHECK(r.solution(0) == 0.0);
  CHECK(r.residual_norm == doctest::Approx(1.0));
  CHECK(r.rank_estimate == 0);
}

TEST_CASE("solve_least_squares errors") {
  Mat a = Mat::Identity(2, 2);
  Vec b = Vec::Ones(3);
  CHECK_THROWS_AS(solve_least_squares(a, b), Error);
  Vec nan_rhs = Vec::Ones(2);
  nan_rhs(1) = INFINITY;
  CHECK_THROWS_AS(solve_least_squares(a, nan_rhs), Error);
}

TEST_CASE("solve_least_squares reproduces nonsingular solutions") {
  testing_support::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = testing_support::random_dim(rng, 1, 8);
    const Mat a = testing_support::random_matrix(rng, n, n) + 3.0 * Mat::Identity(n, n);
    const Vec x = testing_support::random_vector(rng, n);
    const auto r = solve_least_squares(a, Vec(a * x));
    CHECK((r.solution - x).norm() <= 1e-10 * x.norm());
  }
}

TEST_CASE("solve_least_squares is minimum norm on rank deficient systems") {
  Mat a(2, 3);
  a << 1, 1, 0, 0, 0, 0;
  Vec b(2);
  b << 2, 5;
  const auto r = solve_least_squares(a, b);
  CHECK(r.solution(0) == doctest::Approx(1.0));
  CHECK(r.solution(1) == doctest::Approx(1.0));
  CHECK(std::abs(r.solution(2)) < 1e-14);
  CHECK(r.residual_norm == doctest::Approx(5.0));
}

TEST_CASE("range_membership examples") {
  Mat row(1, 2);
  row << 1, 1;
  Vec two(1);
  two << 2;
  auto m = range_membership(row, two, 1e-10);
  REQUIRE(m.member);
  CHECK((row * m.coefficients - two).norm() < 1e-12);

  Mat zero_row = Mat::Zero(1, 2);
  Vec one = Vec::Ones(1);
  CHECK_FALSE(range_membership(zero_row, one, 1e-10).member);

  Mat column(2, 1);
  column << 1, 0;
  Vec e2(2);
  e2 << 0, 1;
  CHECK_FALSE(range_membership(column, e2, 1e-10).member);
  CHECK_THROWS_AS(range_membership(column, e2, 0.0), Error);
}

TEST_CASE("range_membership accepts every image vector") {
  testing_support::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = testing_support::random_dim(rng, 1, 6);
    const auto c = testing_support::random_dim(rng, 1, 6);
    const Mat a = testing_support::random_matrix(rng, r, c);
    const Vec w = 10.0 * testing_support::random_vector(rng, c);
    CHECK(range_membership(a, Vec(a * w)).member);
  }
}

TEST_CASE("null_space and range_basis") {
  Mat a(1, 3);
  a << 1, 2, 3;
  const Mat ns = null_space(a);
  CHECK(ns.cols() == 2);
  CHECK((a * ns).norm() < 1e-14);
  CHECK((ns.transpose() * ns - Mat::Identity(2, 2)).norm() < 1e-14);
  const Mat rb = range_basis(a.transpose());
  CHECK(rb.cols() == 1);
}

TEST_CASE("symmetric positive definite checks") {
  Mat q(2, 2);
  q << 2, 1, 1, 2;
  CHECK(is_symmetric_positive_definite(q));
  CHECK((spd_inverse(q) * q - Mat::Identity(2, 2)).norm() < 1e-14);
  Mat indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_FALSE(is_symmetric_positive_definite(indefinite));
  Mat asym(2, 2);
  asym << 2, 1, 0, 2;
  CHECK_FALSE(is_symmetric_positive_definite(asym));
  CHECK_THROWS_AS(require_spd(indefinite, "Q"), Error);
}
