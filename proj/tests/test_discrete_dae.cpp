#include <doctest.h>

#include <cmath>

#include "descriptor_minimax/discrete_dae.hpp"
#include "test_support.hpp"

using namespace dminimax;
using testing_support::Mat;
using testing_support::Vec;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }
Vec scalar_vec(double v) { return Vec::Constant(1, v); }

testing_support::DaeInstance scalar_chain(Eigen::Index horizon) {
  testing_support::DaeInstance inst;
  inst.dae.horizon = horizon;
  inst.dae.S = scalar(1);
  inst.bounds.Q0 = scalar(1);
  for (Eigen::Index k = 0; k <= horizon; ++k) {
    inst.dae.F.push_back(scalar(1));
    inst.dae.H.push_back(scalar(1));
    inst.bounds.Q2.push_back(scalar(1));
  }
  for (Eigen::Index k = 0; k < horizon; ++k) {
    inst.dae.C.push_back(scalar(1));
    inst.dae.B.push_back(scalar(1));
    inst.bounds.Q1.push_back(scalar(1));
  }
  return inst;
}

/// Random DAE with general input maps (p may differ from m) and random S.
testing_support::DaeInstance random_general_dae(testing_support::Rng& rng) {
  const auto n = testing_support::random_dim(rng, 1, 3);
  const auto m = testing_support::random_dim(rng, 1, 3);
  const auto p = testing_support::random_dim(rng, 1, 3);
  const auto l = testing_support::random_dim(rng, 1, 3);
  const auto horizon = testing_support::random_dim(rng, 0, 8);
  testing_support::DaeInstance inst;
  inst.dae.horizon = horizon;
  inst.dae.S = testing_support::random_matrix(rng, m, m);
  inst.bounds.Q0 = testing_support::random_spd(rng, m);
  for (Eigen::Index k = 0; k <= horizon; ++k) {
    inst.dae.F.push_back(testing_support::random_matrix(rng, m, n));
    inst.dae.H.push_back(testing_support::random_matrix(rng, l, n));
    inst.bounds.Q2.push_back(testing_support::random_spd(rng, l));
  }
  for (Eigen::Index k = 0; k < horizon; ++k) {
    inst.dae.C.push_back(0.7 * testing_support::random_matrix(rng, m, n));
    inst.dae.B.push_back(testing_support::random_matrix(rng, m, p));
    inst.bounds.Q1.push_back(testing_support::random_spd(rng, p));
  }
  return inst;
}

std::vector<Vec> representable_functional(testing_support::Rng& rng, const DiscreteDAE<double>& dae) {
  const auto model = flatten(dae);
  const Vec ell = model.F.transpose() * testing_support::random_vector(rng, model.F.rows()) +
                  model.H.transpose() * testing_support::random_vector(rng, model.H.rows());
  return split(ell, dae.state_dim(), dae.horizon + 1);
}

}  // namespace

TEST_CASE("flatten with N = 0") {
  auto inst = scalar_chain(0);
  const auto model = flatten(inst.dae);
  CHECK(model.F == scalar(1));
  CHECK(model.B == scalar(1));
  CHECK(model.H == scalar(1));
}

TEST_CASE("flatten with N = 1 follows the block pattern") {
  auto inst = scalar_chain(1);
  const auto model = flatten(inst.dae);
  Mat expected_f(2, 2);
  expected_f << 1, 0, -1, 1;
  CHECK(model.F == expected_f);
  CHECK(model.B == Mat::Identity(2, 2));
  CHECK(model.H == Mat::Identity(2, 2));
}

TEST_CASE("flatten of zero blocks is zero") {
  DiscreteDAE<double> dae;
  dae.horizon = 2;
  dae.S = Mat::Zero(2, 2);
  for (int k = 0; k < 3; ++k) {
    dae.F.push_back(Mat::Zero(2, 3));
    dae.H.push_back(Mat::Zero(1, 3));
  }
  for (int k = 0; k < 2; ++k) {
    dae.C.push_back(Mat::Zero(2, 3));
    dae.B.push_back(Mat::Zero(2, 2));
  }
  const auto model = flatten(dae);
  CHECK(model.F.rows() == 6);
  CHECK(model.F.cols() == 9);
  CHECK(model.B.cols() == 6);
  CHECK(model.H.rows() == 3);
  CHECK(model.F.norm() == 0.0);
  CHECK(model.B.norm() == 0.0);
  CHECK(model.H.norm() == 0.0);
}

TEST_CASE("flatten rejects shape mismatches") {
  auto inst = scalar_chain(2);
  inst.dae.C.pop_back();
  CHECK_THROWS_AS(flatten(inst.dae), Error);
  auto other = scalar_chain(1);
  other.dae.H[1] = Mat::Ones(1, 2);
  CHECK_THROWS_AS(flatten(other.dae), Error);
  auto bad_s = scalar_chain(1);
  bad_s.dae.S = Mat::Ones(2, 2);
  CHECK_THROWS_AS(flatten(bad_s.dae), Error);
}

TEST_CASE("variational estimate with N = 0 matches the static example") {
  auto inst = scalar_chain(0);
  const auto r = variational_estimate(inst.dae, inst.bounds, {scalar_vec(1)}, {scalar_vec(1)});
  REQUIRE(r.feasible);
  CHECK(r.x_hat[0](0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.sigma_hat == doctest::Approx(0.5).epsilon(1e-12));
  const auto b = estimate_from_block(inst.dae, inst.bounds, {scalar_vec(1)}, {scalar_vec(1)});
  CHECK(b.x_hat[0](0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero functional gives zero estimate and error") {
  auto inst = scalar_chain(3);
  const std::vector<Vec> ell(4, scalar_vec(0));
  const std::vector<Vec> y(4, scalar_vec(0.2));
  const auto r = variational_estimate(inst.dae, inst.bounds, ell, y);
  CHECK(r.estimate_value == 0.0);
  CHECK(r.sigma_hat == 0.0);
  const auto b = estimate_from_block(inst.dae, inst.bounds, ell, y);
  CHECK(b.estimate_value == 0.0);
  CHECK(b.sigma_hat == 0.0);
}

TEST_CASE("N = 1 scalar chain against the constrained quadratic oracle") {
  // X = {(x0, x1) : x0^2 + (x1 - x0)^2 + (1 - x0)^2 + (1 - x1)^2 <= 1}. Brute-force
  // grid search and the exact quadratic give the x1-range center 4/5 and
  // half-width sqrt(0.24).
  auto inst = scalar_chain(1);
  const std::vector<Vec> ell{scalar_vec(0), scalar_vec(1)};
  const std::vector<Vec> y{scalar_vec(1), scalar_vec(1)};
  const auto r = variational_estimate(inst.dae, inst.bounds, ell, y);
  REQUIRE(r.feasible);
  CHECK(r.estimate_value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.sigma_hat == doctest::Approx(std::sqrt(0.24)).epsilon(1e-12));
  const auto b = estimate_from_block(inst.dae, inst.bounds, ell, y);
  CHECK(b.estimate_value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(b.sigma_hat == doctest::Approx(std::sqrt(0.24)).epsilon(1e-12));
}

TEST_CASE("non-representable functional gives infinite error on both paths") {
  auto inst = scalar_chain(1);
  inst.dae.F[1] = scalar(0);
  inst.dae.C[0] = scalar(0);
  inst.dae.H[1] = scalar(0);  // x1 is unconstrained and unobserved
  const std::vector<Vec> ell{scalar_vec(0), scalar_vec(1)};
  const std::vector<Vec> y{scalar_vec(0.1), scalar_vec(0.1)};
  const auto r = variational_estimate(inst.dae, inst.bounds, ell, y);
  CHECK_FALSE(r.feasible);
  CHECK(std::isinf(r.sigma_hat));
  const auto b = estimate_from_block(inst.dae, inst.bounds, ell, y);
  CHECK_FALSE(b.feasible);
  CHECK(std::isinf(b.sigma_hat));
}

TEST_CASE("inconsistent observations raise InconsistentData") {
  auto inst = scalar_chain(1);
  const std::vector<Vec> ell{scalar_vec(0), scalar_vec(1)};
  const std::vector<Vec> y{scalar_vec(5), scalar_vec(-5)};
  CHECK_THROWS_AS(variational_estimate(inst.dae, inst.bounds, ell, y), Error);
  CHECK_THROWS_AS(estimate_from_block(inst.dae, inst.bounds, ell, y), Error);
}

TEST_CASE("flattened and block paths agree on random systems") {
  testing_support::Rng rng(101);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_general_dae(rng);
    const auto ell = representable_functional(rng, inst.dae);
    std::vector<Vec> y;
    try {
      y = testing_support::consistent_observations(rng, inst, 0.6);
    } catch (const Error&) {
      continue;
    }
    const auto a = variational_estimate(inst.dae, inst.bounds, ell, y);
    const auto b = estimate_from_block(inst.dae, inst.bounds, ell, y);
    REQUIRE(a.feasible);
    REQUIRE(b.feasible);
    CHECK(testing_support::relative_gap(b.estimate_value, a.estimate_value) <= 1e-9);
    double scale = 1.0;
    for (const auto& block : ell) scale += block.norm();
    CHECK(testing_support::half_widths_agree(b.sigma_hat, a.sigma_hat, 1e-9, scale));
    ++compared;
  }
  CHECK(compared == 100);
}

TEST_CASE("identity descriptor reduces to the normal-equations minimizer") {
  testing_support::Rng rng(107);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = testing_support::random_dim(rng, 1, 3);
    const auto l = testing_support::random_dim(rng, 1, 3);
    const auto horizon = testing_support::random_dim(rng, 0, 8);
    auto inst = testing_support::random_identity_input_dae(rng, n, n, l, horizon);
    for (auto& f : inst.dae.F) f = Mat::Identity(n, n);
    const auto y = testing_support::consistent_observations(rng, inst, 0.5);
    const auto expected = testing_support::normal_equations_trajectory(inst, y);
    std::vector<Vec> ell(inst.dae.steps(), Vec::Zero(n));
    ell.back() = testing_support::random_vector(rng, n);
    const auto r = variational_estimate(inst.dae, inst.bounds, ell, y);
    REQUIRE(r.feasible);
    for (std::size_t k = 0; k < expected.size(); ++k) {
      CHECK((r.x_hat[k] - expected[k]).norm() <= 1e-8 * (1 + expected[k].norm()));
    }
  }
}
