#include <doctest.h>

#include <cmath>
#include <limits>

#include "descriptor_minimax/static_minimax.hpp"
#include "test_support.hpp"

using namespace dminimax;
using testing_support::Mat;
using testing_support::Vec;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }
Vec scalar_vec(double v) { return Vec::Constant(1, v); }

StaticModel<double> scalar_model(double F, double B, double H) { return {scalar(F), scalar(B), scalar(H)}; }

StaticEllipsoid<double> unit_bounds(BoundsKind kind) { return {scalar(1), scalar(1), kind}; }

}  // namespace

TEST_CASE("representable examples") {
  CHECK(representable(scalar_model(1, 1, 1), scalar_vec(7)));
  CHECK_FALSE(representable(scalar_model(0, 1, 0), scalar_vec(1)));
  CHECK(representable(scalar_model(0, 1, 1), scalar_vec(2)));
  CHECK_THROWS_AS(representable(scalar_model(1, 1, 1), Vec(Vec::Ones(2))), Error);
}

TEST_CASE("a priori scalar example") {
  const auto r = apriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::apriori), scalar_vec(1),
                                  std::optional<Vec>(scalar_vec(3.0)));
  REQUIRE(r.feasible);
  CHECK(r.p(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.z_hat(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.u_hat(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.sigma_hat == doctest::Approx(0.5).epsilon(1e-14));
  REQUIRE(r.estimate_value.has_value());
  CHECK(*r.estimate_value == doctest::Approx(1.5));
  CHECK(r.x_hat.size() == 0);
}

TEST_CASE("a priori zero functional and infeasible functional") {
  testing_support::Rng rng(1);
  const auto model = testing_support::random_static_model(rng, 3, 2, 2, 2);
  const auto bounds = testing_support::random_static_bounds(rng, 2, 2, BoundsKind::apriori);
  const auto zero = apriori_estimate(model, bounds, Vec(Vec::Zero(3)));
  REQUIRE(zero.feasible);
  CHECK(zero.u_hat.norm() == doctest::Approx(0.0));
  CHECK(zero.sigma_hat == doctest::Approx(0.0));
  CHECK_FALSE(zero.estimate_value.has_value());

  const auto inf = apriori_estimate(scalar_model(0, 1, 0), unit_bounds(BoundsKind::apriori), scalar_vec(1));
  CHECK_FALSE(inf.feasible);
  CHECK(std::isinf(inf.sigma_hat));
  CHECK(inf.u_hat.size() == 0);
  CHECK_FALSE(inf.estimate_value.has_value());
}

TEST_CASE("a priori errors") {
  StaticEllipsoid<double> bad{scalar(-1), scalar(1), BoundsKind::apriori};
  CHECK_THROWS_AS(apriori_estimate(scalar_model(1, 1, 1), bad, scalar_vec(1)), Error);
  try {
    apriori_estimate(scalar_model(1, 1, 1), bad, scalar_vec(1));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidBounds);
  }
  CHECK_THROWS_AS(apriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::aposteriori), scalar_vec(1)),
                  Error);
  StaticModel<double> mismatched{Mat::Ones(2, 3), Mat::Ones(2, 1), Mat::Ones(2, 2)};
  CHECK_THROWS_AS(apriori_estimate(mismatched, unit_bounds(BoundsKind::apriori), Vec(Vec::Ones(3))), Error);
}

TEST_CASE("a posteriori scalar example against the interval oracle") {
  const auto interval = testing_support::scalar_reachability_interval(1, 1, 1, 1, 1, 1);
  const double center = 0.5 * (interval.lo + interval.hi);
  const double half_width = 0.5 * (interval.hi - interval.lo);
  CHECK(center == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(half_width == doctest::Approx(0.5).epsilon(1e-9));

  const auto r = aposteriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::aposteriori), scalar_vec(1),
                                      scalar_vec(1));
  REQUIRE(r.feasible);
  CHECK(std::abs(r.x_hat(0) - 0.5) <= 1e-12);
  CHECK(std::abs(r.sigma_hat - 0.5) <= 1e-12);
  CHECK(std::abs(*r.estimate_value - 0.5) <= 1e-12);
}

TEST_CASE("a posteriori with zero data") {
  // X = {x : 2 x^2 <= 1}: center 0, half-width 1/sqrt(2).
  const auto interval = testing_support::scalar_reachability_interval(1, 1, 1, 1, 1, 0);
  const double half_width = 0.5 * (interval.hi - interval.lo);
  const auto r = aposteriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::aposteriori), scalar_vec(1),
                                      scalar_vec(0));
  REQUIRE(r.feasible);
  CHECK(std::abs(r.x_hat(0)) < 1e-15);
  CHECK(r.sigma_hat == doctest::Approx(half_width).epsilon(1e-9));
  CHECK(r.sigma_hat == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  const auto zero = aposteriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::aposteriori), scalar_vec(0),
                                         scalar_vec(1));
  CHECK(*zero.estimate_value == 0.0);
  CHECK(zero.sigma_hat == 0.0);
}

TEST_CASE("a posteriori interval oracle on scalar sweeps") {
  for (double F : {0.5, 1.0, 2.0}) {
    for (double H : {0.3, 1.0, 1.7}) {
      for (double y : {-0.6, 0.0, 0.4, 0.9}) {
        const double q1 = 1.3;
        const double q2 = 0.8;
        StaticModel<double> model = scalar_model(F, 1.0, H);
        StaticEllipsoid<double> bounds{scalar(q1), scalar(q2), BoundsKind::aposteriori};
        const auto r = aposteriori_estimate(model, bounds, scalar_vec(1), scalar_vec(y));
        const auto iv = testing_support::scalar_reachability_interval(F, 1.0, H, q1, q2, y);
        CHECK(r.x_hat(0) == doctest::Approx(0.5 * (iv.lo + iv.hi)).epsilon(1e-8));
        CHECK(r.sigma_hat == doctest::Approx(0.5 * (iv.hi - iv.lo)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("a posteriori inconsistent data") {
  // y = 3: min over x of x^2 + (3 - x)^2 is 4.5 > 1, so X is empty.
  try {
    aposteriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::aposteriori), scalar_vec(1), scalar_vec(3));
    FAIL("expected InconsistentData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentData);
  }
  // Boundary case: X = {1/2 * sqrt(2)} is a single point; bracket is zero up to rounding.
  const auto r = aposteriori_estimate(scalar_model(1, 1, 1), unit_bounds(BoundsKind::aposteriori), scalar_vec(1),
                                      scalar_vec(std::sqrt(2.0)));
  CHECK(r.sigma_hat == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("a posteriori infeasible functional") {
  const auto r = aposteriori_estimate(scalar_model(0, 1, 0), unit_bounds(BoundsKind::aposteriori), scalar_vec(1),
                                      scalar_vec(0.1));
  CHECK_FALSE(r.feasible);
  CHECK(std::isinf(r.sigma_hat));
}

TEST_CASE("worst_case_error_of examples") {
  const auto model = scalar_model(1, 1, 1);
  const auto bounds = unit_bounds(BoundsKind::apriori);
  const auto best = apriori_estimate(model, bounds, scalar_vec(1));
  CHECK(worst_case_error_of(model, bounds, scalar_vec(1), best.u_hat, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(worst_case_error_of(model, bounds, scalar_vec(1), scalar_vec(0), 0.0) == doctest::Approx(1.0));
  CHECK(worst_case_error_of(model, bounds, scalar_vec(0), scalar_vec(0), 0.0) == 0.0);
  // c shifts the bias: (1 + 0.5)^2.
  CHECK(worst_case_error_of(model, bounds, scalar_vec(1), scalar_vec(0), 0.5) == doctest::Approx(2.25));
  // F = 0 leaves x unbounded; a functional that sees it has infinite error.
  CHECK(std::isinf(worst_case_error_of(scalar_model(0, 1, 1), bounds, scalar_vec(1), scalar_vec(0), 0.0)));
}

TEST_CASE("a priori optimality against random perturbations") {
  testing_support::Rng rng(17);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = testing_support::random_dim(rng, 1, 3);
    const auto m = testing_support::random_dim(rng, 1, 3);
    const auto p = testing_support::random_dim(rng, 1, 3);
    const auto l = testing_support::random_dim(rng, 1, 3);
    const auto model = testing_support::random_static_model(rng, n, m, p, l);
    const auto bounds = testing_support::random_static_bounds(rng, p, l, BoundsKind::apriori);
    const Vec ell = model.F.transpose() * testing_support::random_vector(rng, m) +
                    model.H.transpose() * testing_support::random_vector(rng, l);
    const auto r = apriori_estimate(model, bounds, ell);
    REQUIRE(r.feasible);
    const double best = worst_case_error_of(model, bounds, ell, r.u_hat, 0.0);
    CHECK(best == doctest::Approx(r.sigma_hat).epsilon(1e-8));
    for (int k = 0; k < 50; ++k) {
      Vec u = r.u_hat;
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) += 0.3 * unit(rng);
      const double c = 0.3 * unit(rng);
      CHECK(best <= worst_case_error_of(model, bounds, ell, u, c) + 1e-8);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("a priori error scales quadratically") {
  testing_support::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = testing_support::random_static_model(rng, 3, 2, 2, 2);
    const auto bounds = testing_support::random_static_bounds(rng, 2, 2, BoundsKind::apriori);
    const Vec ell = model.F.transpose() * testing_support::random_vector(rng, 2) +
                    model.H.transpose() * testing_support::random_vector(rng, 2);
    const auto base = apriori_estimate(model, bounds, ell);
    for (double alpha : {0.5, 2.0, 10.0}) {
      const auto scaled = apriori_estimate(model, bounds, Vec(alpha * ell));
      CHECK(std::abs(scaled.sigma_hat - alpha * alpha * base.sigma_hat) <= 1e-10 * alpha * alpha * base.sigma_hat);
      CHECK((scaled.u_hat - alpha * base.u_hat).norm() <= 1e-10 * (1 + alpha * base.u_hat.norm()));
    }
  }
}

TEST_CASE("estimates do not depend on the dual solution chosen for singular F") {
  testing_support::Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    auto model = testing_support::random_static_model(rng, 3, 3, 2, 2);
    model.F.col(2) = model.F.col(0) + model.F.col(1);  // singular F, non-unique (p, z)
    model.F.row(1) = model.F.row(0);
    const auto prior_bounds = testing_support::random_static_bounds(rng, 2, 2, BoundsKind::apriori);
    auto post_bounds = prior_bounds;
    post_bounds.kind = BoundsKind::aposteriori;
    const Vec ell = model.F.transpose() * testing_support::random_vector(rng, 3) +
                    model.H.transpose() * testing_support::random_vector(rng, 2);
    SolveOptions<double> swapped;
    swapped.ordering = DualOrdering::multiplier_first;
    const auto a = apriori_estimate(model, prior_bounds, ell);
    const auto b = apriori_estimate(model, prior_bounds, ell, std::nullopt, swapped);
    CHECK((a.u_hat - b.u_hat).norm() <= 1e-9 * (1 + a.u_hat.norm()));
    CHECK(testing_support::relative_gap(a.sigma_hat, b.sigma_hat) <= 1e-9);

    // Perturb p by a null direction of the dual system: same u_hat and sigma.
    Mat system(3 + 3, 3 + 3);
    system << model.F, -model.B * spd_inverse(prior_bounds.Q1) * model.B.transpose(),
        model.H.transpose() * prior_bounds.Q2 * model.H, model.F.transpose();
    const Mat kernel = null_space(system);
    if (kernel.cols() > 0) {
      Vec shifted(6);
      shifted << a.p, a.z_hat;
      shifted += kernel * testing_support::random_vector(rng, kernel.cols());
      const Vec p2 = shifted.head(3);
      CHECK((prior_bounds.Q2 * model.H * p2 - a.u_hat).norm() <= 1e-9);
      CHECK(std::abs(ell.dot(p2) - a.sigma_hat) <= 1e-9 * (1 + a.sigma_hat));
    }

    const Vec y = 0.2 * testing_support::random_vector(rng, 2);
    const auto c = aposteriori_estimate(model, post_bounds, ell, y);
    const auto d = aposteriori_estimate(model, post_bounds, ell, y, swapped);
    CHECK(testing_support::relative_gap(*c.estimate_value, *d.estimate_value) <= 1e-9);
    CHECK(testing_support::relative_gap(c.sigma_hat, d.sigma_hat) <= 1e-9);
  }
}

TEST_CASE("duality identity (ell, x_hat) = (Q2 H p, y)") {
  testing_support::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = testing_support::random_dim(rng, 1, 4);
    const auto m = testing_support::random_dim(rng, 1, 4);
    const auto p = testing_support::random_dim(rng, 1, 4);
    const auto l = testing_support::random_dim(rng, 1, 4);
    const auto model = testing_support::random_static_model(rng, n, m, p, l);
    const auto bounds = testing_support::random_static_bounds(rng, p, l, BoundsKind::aposteriori);
    const Vec ell = model.F.transpose() * testing_support::random_vector(rng, m) +
                    model.H.transpose() * testing_support::random_vector(rng, l);
    const Vec y = 0.1 * testing_support::random_vector(rng, l);
    try {
      const auto r = aposteriori_estimate(model, bounds, ell, y);
      REQUIRE(r.feasible);
      const double dual = (bounds.Q2 * model.H * r.p).dot(y);
      CHECK(std::abs(*r.estimate_value - dual) <= 1e-9 * (1 + std::abs(dual)));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InconsistentData);
    }
  }
}
