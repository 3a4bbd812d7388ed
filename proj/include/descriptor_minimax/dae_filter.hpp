#pragma once

#include <string>
#include <utility>
#include <vector>

#include "descriptor_minimax/discrete_dae.hpp"
#include "descriptor_minimax/linalg.hpp"

namespace dminimax {

template <typename Scalar>
struct FilterState {
  Index k{0};
  Vector<Scalar> x_hat;
  Matrix<Scalar> P;
};

template <typename Scalar>
struct FilterResult {
  Scalar estimate{0};
  FilterState<Scalar> final;
};

// Smallest admissible eigenvalue of Q1^-1 + C P C' before the step is
// declared numerically broken.
inline constexpr double kInnerEigenFloor = 1e-14;

/// Columns of [F; H] linearly independent at tolerance `tol`.
template <typename Scalar>
bool rank_precondition(const Matrix<Scalar>& F, const Matrix<Scalar>& H, Scalar tol = Scalar(kRankTolerance)) {
  if (F.cols() != H.cols()) {
    throw Error(ErrorKind::InvalidInput, "F and H must have the same number of columns");
  }
  Matrix<Scalar> stacked(F.rows() + H.rows(), F.cols());
  stacked << F, H;
  return numerical_rank(stacked, tol) == F.cols();
}

/// Rewrites square invertible input maps B_k and S as identities, replacing
/// Q1_k by (B_k Q1_k^-1 B_k')^-1 and Q0 by (S Q0^-1 S')^-1. Leaves the bounding
/// set unchanged; rejects non-square or singular maps.
template <typename Scalar>
std::pair<DiscreteDAE<Scalar>, DAEEllipsoid<Scalar>> normalize_input_maps(const DiscreteDAE<Scalar>& dae,
                                                                          const DAEEllipsoid<Scalar>& bounds) {
  dae.validate();
  bounds.validate(dae);
  const Index m = dae.equation_dim();
  auto transform = [m](const Matrix<Scalar>& map, const Matrix<Scalar>& weight, const std::string& what) {
    if (map.rows() != m || map.cols() != m || numerical_rank(map) != m) {
      throw Error(ErrorKind::InvalidInput, what + " must be square invertible to be normalized");
    }
    return spd_inverse(Matrix<Scalar>(map * spd_inverse(weight) * map.transpose()));
  };
  auto out = std::make_pair(dae, bounds);
  out.second.Q0 = transform(dae.S, bounds.Q0, "S");
  out.first.S = Matrix<Scalar>::Identity(m, m);
  for (std::size_t k = 0; k < dae.B.size(); ++k) {
    out.second.Q1[k] = transform(dae.B[k], bounds.Q1[k], "B[" + std::to_string(k) + "]");
    out.first.B[k] = Matrix<Scalar>::Identity(m, m);
  }
  return out;
}

namespace detail {

template <typename Scalar>
void require_identity_inputs(const DiscreteDAE<Scalar>& dae) {
  auto is_identity = [](const Matrix<Scalar>& a) { return a.rows() == a.cols() && a.isIdentity(Scalar(1e-14)); };
  if (!is_identity(dae.S)) {
    throw Error(ErrorKind::InvalidInput, "filter requires S = I (use normalize_input_maps)");
  }
  for (std::size_t k = 0; k < dae.B.size(); ++k) {
    if (!is_identity(dae.B[k])) {
      throw Error(ErrorKind::InvalidInput,
                  "filter requires B_k = I (use normalize_input_maps), violated at k=" + std::to_string(k));
    }
  }
}

template <typename Scalar>
void require_rank(const DiscreteDAE<Scalar>& dae, std::size_t k) {
  if (!rank_precondition<Scalar>(dae.F[k], dae.H[k])) {
    throw Error(ErrorKind::RankDeficient, "columns of [F_k; H_k] are dependent at k=" + std::to_string(k));
  }
}

template <typename Scalar>
Matrix<Scalar> spd_inverse_checked(const Matrix<Scalar>& a, const char* what) {
  Eigen::LLT<Matrix<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalBreakdown, std::string(what) + " lost positive definiteness");
  }
  Matrix<Scalar> inv = llt.solve(Matrix<Scalar>::Identity(a.rows(), a.cols()));
  return Scalar(0.5) * (inv + inv.transpose());
}

}  // namespace detail

/// P_0 = (F_0' Q0 F_0 + H_0' Q2_0 H_0)^-1, x_0 = P_0 H_0' Q2_0 y_0.
template <typename Scalar>
FilterState<Scalar> filter_init(const DiscreteDAE<Scalar>& dae, const DAEEllipsoid<Scalar>& bounds,
                                const Vector<Scalar>& y0) {
  dae.validate();
  bounds.validate(dae);
  detail::require_identity_inputs(dae);
  detail::require_length(y0, dae.observation_dim(), "y_0");
  detail::require_rank(dae, 0);

  const auto& F0 = dae.F[0];
  const auto& H0 = dae.H[0];
  const Matrix<Scalar> information = F0.transpose() * bounds.Q0 * F0 + H0.transpose() * bounds.Q2[0] * H0;
  FilterState<Scalar> state;
  state.k = 0;
  state.P = detail::spd_inverse_checked(information, "initial information matrix");
  state.x_hat = state.P * (H0.transpose() * (bounds.Q2[0] * y0));
  return state;
}

/// One step of the recursion
///
///   G_k = (Q1_{k-1}^-1 + C_{k-1} P_{k-1} C_{k-1}')^-1,
///   P_k = (F_k' G_k F_k + H_k' Q2_k H_k)^-1,
///   x_k = P_k F_k' G_k C_{k-1} x_{k-1} + P_k H_k' Q2_k y_k.
template <typename Scalar>
FilterState<Scalar> filter_step(const FilterState<Scalar>& state, const DiscreteDAE<Scalar>& dae,
                                const DAEEllipsoid<Scalar>& bounds, const Vector<Scalar>& y_next) {
  const auto k = static_cast<std::size_t>(state.k + 1);
  if (state.k < 0 || state.k >= dae.horizon) {
    throw Error(ErrorKind::InvalidInput, "filter step beyond horizon (k=" + std::to_string(state.k) + ")");
  }
  detail::require_length(y_next, dae.observation_dim(), "y");
  detail::require_rank(dae, k);

  const auto& C = dae.C[k - 1];
  const auto& F = dae.F[k];
  const auto& H = dae.H[k];
  Matrix<Scalar> inner = spd_inverse(bounds.Q1[k - 1]) + C * state.P * C.transpose();
  inner = Scalar(0.5) * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(inner, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() >= Scalar(kInnerEigenFloor))) {
    throw Error(ErrorKind::NumericalBreakdown, "inner matrix Q1^-1 + C P C' is near singular at k=" + std::to_string(k));
  }
  Eigen::LLT<Matrix<Scalar>> inner_llt(inner);
  const Matrix<Scalar> gain_f = inner_llt.solve(F);  // G_k F_k
  const Vector<Scalar> prior_mean = inner_llt.solve(Vector<Scalar>(C * state.x_hat));  // G_k C x

  const Matrix<Scalar> information = F.transpose() * gain_f + H.transpose() * bounds.Q2[k] * H;
  FilterState<Scalar> next;
  next.k = state.k + 1;
  next.P = detail::spd_inverse_checked(Matrix<Scalar>(Scalar(0.5) * (information + information.transpose())),
                                       "information matrix");
  next.x_hat = next.P * (F.transpose() * prior_mean + H.transpose() * (bounds.Q2[k] * y_next));
  return next;
}

/// Estimate of (ell, x_N) from y_0..y_N in O(N) steps.
template <typename Scalar>
FilterResult<Scalar> filter_run(const DiscreteDAE<Scalar>& dae, const DAEEllipsoid<Scalar>& bounds,
                                const std::vector<Vector<Scalar>>& y_seq, const Vector<Scalar>& ell) {
  dae.validate();
  detail::check_sequence(y_seq, dae.steps(), dae.observation_dim(), "y");
  detail::require_length(ell, dae.state_dim(), "ell");
  FilterResult<Scalar> out;
  out.final = filter_init(dae, bounds, y_seq[0]);
  for (std::size_t k = 1; k < dae.steps(); ++k) out.final = filter_step(out.final, dae, bounds, y_seq[k]);
  out.estimate = ell.dot(out.final.x_hat);
  return out;
}

}  // namespace dminimax
