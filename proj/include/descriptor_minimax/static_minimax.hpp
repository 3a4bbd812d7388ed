#pragma once

#include <limits>
#include <optional>
#include <type_traits>
#include <string>

#include "descriptor_minimax/linalg.hpp"

namespace dminimax {

/// Algebraic model F x = B f observed through y = H x + noise.
template <typename Scalar>
struct StaticModel {
  Matrix<Scalar> F;  // m x n
  Matrix<Scalar> B;  // m x p
  Matrix<Scalar> H;  // l x n

  Index state_dim() const { return F.cols(); }
  Index equation_dim() const { return F.rows(); }
  Index input_dim() const { return B.cols(); }
  Index observation_dim() const { return H.rows(); }

  void validate() const {
    if (F.rows() < 1 || F.cols() < 1 || B.cols() < 1 || H.rows() < 1) {
      throw Error(ErrorKind::InvalidInput, "static model matrices must be non-empty");
    }
    if (B.rows() != F.rows()) {
      throw Error(ErrorKind::InvalidInput, "B has " + std::to_string(B.rows()) + " rows, F has " +
                                               std::to_string(F.rows()));
    }
    if (H.cols() != F.cols()) {
      throw Error(ErrorKind::InvalidInput, "H has " + std::to_string(H.cols()) + " columns, F has " +
                                               std::to_string(F.cols()));
    }
    require_finite(F, "F");
    require_finite(B, "B");
    require_finite(H, "H");
  }
};

enum class BoundsKind { apriori, aposteriori };

/// Ellipsoidal bounds. For `apriori` Q1 bounds the input, (Q1 f, f) <= 1, and Q2
/// bounds the noise correlation, tr(Q2 R) <= 1. For `aposteriori` they form one
/// joint ellipsoid (Q1 f, f) + (Q2 g, g) <= 1.
template <typename Scalar>
struct StaticEllipsoid {
  Matrix<Scalar> Q1;  // p x p
  Matrix<Scalar> Q2;  // l x l
  BoundsKind kind{BoundsKind::aposteriori};

  void validate(const StaticModel<Scalar>& model) const {
    if (Q1.rows() != model.input_dim() || Q1.cols() != model.input_dim()) {
      throw Error(ErrorKind::InvalidInput, "Q1 must be " + std::to_string(model.input_dim()) + "x" +
                                               std::to_string(model.input_dim()));
    }
    if (Q2.rows() != model.observation_dim() || Q2.cols() != model.observation_dim()) {
      throw Error(ErrorKind::InvalidInput, "Q2 must be " + std::to_string(model.observation_dim()) + "x" +
                                               std::to_string(model.observation_dim()));
    }
    require_spd(Q1, "Q1");
    require_spd(Q2, "Q2");
  }
};

template <typename Scalar>
struct StaticEstimateReport {
  bool feasible{false};
  std::optional<Scalar> estimate_value;
  Vector<Scalar> u_hat;  // l
  Vector<Scalar> p;      // n, a priori dual state
  Vector<Scalar> z_hat;  // m
  Vector<Scalar> x_hat;  // n, a posteriori only
  Vector<Scalar> p_hat;  // m, a posteriori only
  Scalar sigma_hat{std::numeric_limits<Scalar>::infinity()};
};

/// Unknown ordering used when stacking the coupled dual system. Both orderings
/// yield the same estimate and error; tests compare them.
enum class DualOrdering { state_first, multiplier_first };

template <typename Scalar>
struct SolveOptions {
  Scalar rank_tol = Scalar(kRankTolerance);
  Scalar membership_tol = Scalar(kMembershipTolerance);
  DualOrdering ordering = DualOrdering::state_first;
};

// Rounding below zero in 1 - (y - H x, Q2 y) is clamped; anything beyond this
// means the data are inconsistent with the bounds.
inline constexpr double kBracketClampThreshold = -1e-9;

namespace detail {

template <typename Scalar>
void require_length(const Vector<Scalar>& v, Index n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " has length " + std::to_string(v.size()) +
                                             ", expected " + std::to_string(n));
  }
  require_finite(v, what);
}

/// Solves [F, -W; G, F'] [s; t] = [r1; r2] with W = B Q1^-1 B', G = H' Q2 H.
/// Returns (s, t) regardless of the internal ordering.
template <typename Scalar>
struct DualSolution {
  Vector<Scalar> state;       // n
  Vector<Scalar> multiplier;  // m
  Scalar residual{0};
};

template <typename Scalar>
class DualSystem {
 public:
  DualSystem(const StaticModel<Scalar>& model, const StaticEllipsoid<Scalar>& bounds,
             const SolveOptions<Scalar>& options)
      : n_(model.state_dim()), m_(model.equation_dim()), options_(options) {
    const Matrix<Scalar> weighted_input = model.B * spd_inverse(bounds.Q1) * model.B.transpose();
    const Matrix<Scalar> observation_gain = model.H.transpose() * bounds.Q2 * model.H;
    system_ = Matrix<Scalar>::Zero(m_ + n_, n_ + m_);
    if (options.ordering == DualOrdering::state_first) {
      system_.topLeftCorner(m_, n_) = model.F;
      system_.topRightCorner(m_, m_) = -weighted_input;
      system_.bottomLeftCorner(n_, n_) = observation_gain;
      system_.bottomRightCorner(n_, m_) = model.F.transpose();
    } else {
      system_.topLeftCorner(m_, m_) = -weighted_input;
      system_.topRightCorner(m_, n_) = model.F;
      system_.bottomLeftCorner(n_, m_) = model.F.transpose();
      system_.bottomRightCorner(n_, n_) = observation_gain;
    }
    cod_.setThreshold(options.rank_tol);
    cod_.compute(system_);
  }

  DualSolution<Scalar> solve(const Vector<Scalar>& top, const Vector<Scalar>& bottom) const {
    Vector<Scalar> rhs(m_ + n_);
    rhs << top, bottom;
    Vector<Scalar> sol = cod_.rank() == 0 ? Vector<Scalar>::Zero(n_ + m_) : Vector<Scalar>(cod_.solve(rhs));
    DualSolution<Scalar> out;
    out.residual = (system_ * sol - rhs).norm();
    if (options_.ordering == DualOrdering::state_first) {
      out.state = sol.head(n_);
      out.multiplier = sol.tail(m_);
    } else {
      out.multiplier = sol.head(m_);
      out.state = sol.tail(n_);
    }
    return out;
  }

 private:
  Index n_;
  Index m_;
  SolveOptions<Scalar> options_;
  Matrix<Scalar> system_;
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod_;
};

template <typename Scalar>
void require_consistent(const DualSolution<Scalar>& s, const Vector<Scalar>& rhs_bottom, const char* what) {
  if (!(s.residual <= Scalar(1e-7) * (Scalar(1) + rhs_bottom.norm()))) {
    throw Error(ErrorKind::NumericalBreakdown,
                std::string(what) + " dual system left residual " + std::to_string(double(s.residual)));
  }
}

}  // namespace detail

/// True iff ell = F' z + H' u for some z, u.
template <typename Scalar>
bool representable(const StaticModel<Scalar>& model, const Vector<Scalar>& ell,
                   Scalar tol = Scalar(kMembershipTolerance)) {
  model.validate();
  detail::require_length(ell, model.state_dim(), "ell");
  Matrix<Scalar> columns(model.state_dim(), model.equation_dim() + model.observation_dim());
  columns << model.F.transpose(), model.H.transpose();
  return range_membership(columns, ell, tol).member;
}

/// Minimax a priori estimate (u_hat, y) of (ell, x) and its mean-squared error.
///
/// (p, z_hat) solve F p = B Q1^-1 B' z_hat, F' z_hat = ell - H' Q2 H p; the
/// estimate weights are u_hat = Q2 H p and the error is (ell, p). The affine
/// constant is zero for centered ellipsoids.
template <typename Scalar>
StaticEstimateReport<Scalar> apriori_estimate(const StaticModel<Scalar>& model,
                                              const StaticEllipsoid<Scalar>& bounds, const Vector<Scalar>& ell,
                                              const std::type_identity_t<std::optional<Vector<Scalar>>>& y = std::nullopt,
                                              const SolveOptions<Scalar>& options = {}) {
  model.validate();
  if (bounds.kind != BoundsKind::apriori) {
    throw Error(ErrorKind::InvalidBounds, "a priori estimate requires a priori bounds");
  }
  bounds.validate(model);
  detail::require_length(ell, model.state_dim(), "ell");
  if (y) detail::require_length(*y, model.observation_dim(), "y");

  StaticEstimateReport<Scalar> report;
  if (!representable(model, ell, options.membership_tol)) return report;

  const detail::DualSystem<Scalar> system(model, bounds, options);
  const auto dual = system.solve(Vector<Scalar>::Zero(model.equation_dim()), ell);
  detail::require_consistent(dual, ell, "a priori");

  report.feasible = true;
  report.p = dual.state;
  report.z_hat = dual.multiplier;
  report.u_hat = bounds.Q2 * model.H * report.p;
  report.sigma_hat = std::max(Scalar(0), ell.dot(report.p));
  if (y) report.estimate_value = report.u_hat.dot(*y);
  return report;
}

/// Minimax a posteriori estimate: (ell, x_hat) where x_hat is the center of the
/// reachability set, with error [1 - (y - H x_hat, Q2 y)]^1/2 (ell, p)^1/2.
template <typename Scalar>
StaticEstimateReport<Scalar> aposteriori_estimate(const StaticModel<Scalar>& model,
                                                  const StaticEllipsoid<Scalar>& bounds,
                                                  const Vector<Scalar>& ell, const Vector<Scalar>& y,
                                                  const SolveOptions<Scalar>& options = {}) {
  model.validate();
  if (bounds.kind != BoundsKind::aposteriori) {
    throw Error(ErrorKind::InvalidBounds, "a posteriori estimate requires a posteriori bounds");
  }
  bounds.validate(model);
  detail::require_length(ell, model.state_dim(), "ell");
  detail::require_length(y, model.observation_dim(), "y");

  StaticEstimateReport<Scalar> report;
  if (!representable(model, ell, options.membership_tol)) return report;

  const detail::DualSystem<Scalar> system(model, bounds, options);
  const Vector<Scalar> data_term = model.H.transpose() * (bounds.Q2 * y);
  const auto center = system.solve(Vector<Scalar>::Zero(model.equation_dim()), data_term);
  detail::require_consistent(center, data_term, "a posteriori");
  const auto prior = system.solve(Vector<Scalar>::Zero(model.equation_dim()), ell);
  detail::require_consistent(prior, ell, "a priori");

  Scalar bracket = Scalar(1) - (y - model.H * center.state).dot(bounds.Q2 * y);
  if (bracket < Scalar(kBracketClampThreshold)) {
    throw Error(ErrorKind::InconsistentData,
                "observations are inconsistent with the bounding set (bracket " + std::to_string(double(bracket)) + ")");
  }
  bracket = std::max(bracket, Scalar(0));

  report.feasible = true;
  report.x_hat = center.state;
  report.p_hat = center.multiplier;
  report.p = prior.state;
  report.z_hat = prior.multiplier;
  report.u_hat = bounds.Q2 * model.H * report.p;
  report.estimate_value = ell.dot(report.x_hat);
  report.sigma_hat = std::sqrt(bracket) * std::sqrt(std::max(Scalar(0), ell.dot(report.p)));
  return report;
}

/// A priori worst-case mean-squared error of the arbitrary estimate (u, y) + c:
///   sup_{F x in B(G)} ((ell - H'u, x) - c)^2 + (Q2^-1 u, u).
///
/// The supremum is evaluated analytically over the (possibly degenerate or
/// unbounded) ellipsoid {x : F x = B f, (Q1 f, f) <= 1}; unbounded directions
/// that the functional sees give +infinity.
template <typename Scalar>
Scalar worst_case_error_of(const StaticModel<Scalar>& model, const StaticEllipsoid<Scalar>& bounds,
                           const Vector<Scalar>& ell, const Vector<Scalar>& u, Scalar c) {
  model.validate();
  bounds.validate(model);
  detail::require_length(ell, model.state_dim(), "ell");
  detail::require_length(u, model.observation_dim(), "u");

  const Index n = model.state_dim();
  const Index p = model.input_dim();
  Matrix<Scalar> constraint(model.equation_dim(), n + p);
  constraint << model.F, -model.B;
  const Matrix<Scalar> basis = null_space(constraint);

  const Scalar noise_term = u.dot(spd_inverse(bounds.Q2) * u);
  const Vector<Scalar> direction = ell - model.H.transpose() * u;
  if (basis.cols() == 0) return c * c + noise_term;

  const Matrix<Scalar> x_part = basis.topRows(n);
  const Matrix<Scalar> f_part = basis.bottomRows(p);
  const Matrix<Scalar> gram = f_part.transpose() * bounds.Q1 * f_part;
  const Vector<Scalar> g = x_part.transpose() * direction;
  if (g.norm() <= Scalar(kMembershipTolerance) * (Scalar(1) + direction.norm())) return c * c + noise_term;

  const auto in_range = range_membership(gram, g);
  if (!in_range.member) return std::numeric_limits<Scalar>::infinity();
  const Scalar half_width = std::sqrt(std::max(Scalar(0), g.dot(in_range.coefficients)));
  const Scalar bias = half_width + std::abs(c);
  return bias * bias + noise_term;
}

}  // namespace dminimax
