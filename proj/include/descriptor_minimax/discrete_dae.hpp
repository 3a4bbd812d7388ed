#pragma once

#include <limits>
#include <string>
#include <vector>

#include "descriptor_minimax/linalg.hpp"
#include "descriptor_minimax/static_minimax.hpp"

namespace dminimax {

/// Discrete-time descriptor system on states x_0..x_N:
///
///   F_0 x_0 = S x0g,
///   F_{k+1} x_{k+1} - C_k x_k = B_k f_k,   k = 0..N-1,
///   y_k = H_k x_k + g_k,                  k = 0..N.
template <typename Scalar>
struct DiscreteDAE {
  Index horizon{0};                // N
  std::vector<Matrix<Scalar>> F;   // N+1 blocks, m x n
  std::vector<Matrix<Scalar>> C;   // N blocks, m x n
  std::vector<Matrix<Scalar>> B;   // N blocks, m x p
  Matrix<Scalar> S;                // m x m
  std::vector<Matrix<Scalar>> H;   // N+1 blocks, l x n

  Index state_dim() const { return F.empty() ? 0 : F.front().cols(); }
  Index equation_dim() const { return F.empty() ? 0 : F.front().rows(); }
  Index input_dim() const { return B.empty() ? 0 : B.front().cols(); }
  Index observation_dim() const { return H.empty() ? 0 : H.front().rows(); }
  std::size_t steps() const { return static_cast<std::size_t>(horizon) + 1; }

  void validate() const {
    if (horizon < 0) throw Error(ErrorKind::InvalidInput, "horizon must be non-negative");
    const auto count = static_cast<std::size_t>(horizon);
    if (F.size() != count + 1 || H.size() != count + 1 || C.size() != count || B.size() != count) {
      throw Error(ErrorKind::InvalidInput, "DAE sequences must have N+1 F/H blocks and N C/B blocks (N=" +
                                               std::to_string(horizon) + ")");
    }
    const Index m = equation_dim();
    const Index n = state_dim();
    const Index l = observation_dim();
    if (m < 1 || n < 1 || l < 1) throw Error(ErrorKind::InvalidInput, "DAE blocks must be non-empty");
    auto check = [](const Matrix<Scalar>& a, Index r, Index c, const std::string& what) {
      if (a.rows() != r || a.cols() != c) {
        throw Error(ErrorKind::InvalidInput, what + " is " + std::to_string(a.rows()) + "x" +
                                                 std::to_string(a.cols()) + ", expected " + std::to_string(r) +
                                                 "x" + std::to_string(c));
      }
      require_finite(a, what);
    };
    for (std::size_t k = 0; k <= count; ++k) {
      check(F[k], m, n, "F[" + std::to_string(k) + "]");
      check(H[k], l, n, "H[" + std::to_string(k) + "]");
    }
    for (std::size_t k = 0; k < count; ++k) {
      check(C[k], m, n, "C[" + std::to_string(k) + "]");
      check(B[k], m, B.front().cols(), "B[" + std::to_string(k) + "]");
    }
    if (count > 0 && input_dim() < 1) throw Error(ErrorKind::InvalidInput, "B blocks must be non-empty");
    check(S, m, m, "S");
  }
};

/// (Q0 x0g, x0g) + sum (Q1_k f_k, f_k) + sum (Q2_k g_k, g_k) <= 1.
template <typename Scalar>
struct DAEEllipsoid {
  Matrix<Scalar> Q0;               // m x m
  std::vector<Matrix<Scalar>> Q1;  // N blocks, p x p
  std::vector<Matrix<Scalar>> Q2;  // N+1 blocks, l x l

  void validate(const DiscreteDAE<Scalar>& dae) const {
    const auto count = static_cast<std::size_t>(dae.horizon);
    if (Q1.size() != count || Q2.size() != count + 1) {
      throw Error(ErrorKind::InvalidInput, "bounds need N Q1 blocks and N+1 Q2 blocks");
    }
    auto check = [](const Matrix<Scalar>& q, Index d, const std::string& what) {
      if (q.rows() != d || q.cols() != d) {
        throw Error(ErrorKind::InvalidInput, what + " must be " + std::to_string(d) + "x" + std::to_string(d));
      }
      require_spd(q, what);
    };
    check(Q0, dae.equation_dim(), "Q0");
    for (std::size_t k = 0; k < count; ++k) check(Q1[k], dae.input_dim(), "Q1[" + std::to_string(k) + "]");
    for (std::size_t k = 0; k <= count; ++k) check(Q2[k], dae.observation_dim(), "Q2[" + std::to_string(k) + "]");
  }
};

template <typename Scalar>
struct TrajectoryEstimate {
  bool feasible{false};
  std::vector<Vector<Scalar>> x_hat;  // N+1 blocks
  std::vector<Vector<Scalar>> p;      // N+1 blocks, a priori dual state
  Scalar estimate_value{0};
  Scalar sigma_hat{std::numeric_limits<Scalar>::infinity()};
};

/// Stacks the DAE into one algebraic model over x = (x_0..x_N),
/// f = (x0g, f_0..f_{N-1}), g = (g_0..g_N).
template <typename Scalar>
StaticModel<Scalar> flatten(const DiscreteDAE<Scalar>& dae) {
  dae.validate();
  const Index m = dae.equation_dim();
  const Index n = dae.state_dim();
  const Index p = dae.input_dim();
  const Index l = dae.observation_dim();
  const Index N = dae.horizon;

  StaticModel<Scalar> out;
  out.F = Matrix<Scalar>::Zero(m * (N + 1), n * (N + 1));
  out.B = Matrix<Scalar>::Zero(m * (N + 1), m + p * N);
  out.H = Matrix<Scalar>::Zero(l * (N + 1), n * (N + 1));

  out.F.block(0, 0, m, n) = dae.F[0];
  out.B.block(0, 0, m, m) = dae.S;
  for (Index k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out.F.block(m * (k + 1), n * k, m, n) = -dae.C[ku];
    out.F.block(m * (k + 1), n * (k + 1), m, n) = dae.F[ku + 1];
    out.B.block(m * (k + 1), m + p * k, m, p) = dae.B[ku];
  }
  for (Index k = 0; k <= N; ++k) {
    out.H.block(l * k, n * k, l, n) = dae.H[static_cast<std::size_t>(k)];
  }
  return out;
}

template <typename Scalar>
StaticEllipsoid<Scalar> flatten_bounds(const DAEEllipsoid<Scalar>& bounds, BoundsKind kind) {
  std::vector<Matrix<Scalar>> input_blocks;
  input_blocks.reserve(bounds.Q1.size() + 1);
  input_blocks.push_back(bounds.Q0);
  input_blocks.insert(input_blocks.end(), bounds.Q1.begin(), bounds.Q1.end());
  StaticEllipsoid<Scalar> out;
  out.Q1 = block_diagonal<Scalar>(input_blocks);
  out.Q2 = block_diagonal<Scalar>(bounds.Q2);
  out.kind = kind;
  return out;
}

namespace detail {

template <typename Scalar>
void check_sequence(const std::vector<Vector<Scalar>>& seq, std::size_t count, Index dim, const char* what) {
  if (seq.size() != count) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " has " + std::to_string(seq.size()) +
                                             " blocks, expected " + std::to_string(count));
  }
  for (const auto& v : seq) require_length(v, dim, what);
}

}  // namespace detail

/// Minimax a posteriori estimate of sum (ell_k, x_k) from y_0..y_N, computed by
/// delegating to the static estimator on the flattened model.
template <typename Scalar>
TrajectoryEstimate<Scalar> variational_estimate(const DiscreteDAE<Scalar>& dae, const DAEEllipsoid<Scalar>& bounds,
                                                const std::vector<Vector<Scalar>>& ell_seq,
                                                const std::vector<Vector<Scalar>>& y_seq,
                                                const SolveOptions<Scalar>& options = {}) {
  dae.validate();
  bounds.validate(dae);
  detail::check_sequence(ell_seq, dae.steps(), dae.state_dim(), "ell");
  detail::check_sequence(y_seq, dae.steps(), dae.observation_dim(), "y");

  const auto model = flatten(dae);
  const auto ellipsoid = flatten_bounds(bounds, BoundsKind::aposteriori);
  const auto report = aposteriori_estimate<Scalar>(model, ellipsoid, stack<Scalar>(ell_seq), stack<Scalar>(y_seq),
                                                   options);
  TrajectoryEstimate<Scalar> out;
  if (!report.feasible) return out;
  const auto steps = static_cast<Index>(dae.steps());
  out.feasible = true;
  out.x_hat = split(report.x_hat, dae.state_dim(), steps);
  out.p = split(report.p, dae.state_dim(), steps);
  out.estimate_value = *report.estimate_value;
  out.sigma_hat = report.sigma_hat;
  return out;
}

/// Same contract as variational_estimate, but the saddle system is assembled
/// directly from the per-step recursions
///
///   F_{k+1} x_{k+1} = C_k x_k + B_k Q1_k^-1 B_k' p_{k+1},  F_0 x_0 = S Q0^-1 S' p_0,
///   F_k' p_k = C_k' p_{k+1} + H_k' Q2_k (y_k - H_k x_k),   (no p_{N+1} term),
///
/// with unknowns interleaved per time step, and solved by SVD. Representability
/// is read off the consistency of the a priori right-hand side.
template <typename Scalar>
TrajectoryEstimate<Scalar> estimate_from_block(const DiscreteDAE<Scalar>& dae, const DAEEllipsoid<Scalar>& bounds,
                                               const std::vector<Vector<Scalar>>& ell_seq,
                                               const std::vector<Vector<Scalar>>& y_seq,
                                               Scalar rank_tol = Scalar(kRankTolerance)) {
  dae.validate();
  bounds.validate(dae);
  detail::check_sequence(ell_seq, dae.steps(), dae.state_dim(), "ell");
  detail::check_sequence(y_seq, dae.steps(), dae.observation_dim(), "y");

  const Index n = dae.state_dim();
  const Index m = dae.equation_dim();
  const Index N = dae.horizon;
  const Index stride = n + m;
  const Index size = stride * (N + 1);

  // Per step k the unknown block is (x_k, p_k); the equation block is
  // (model row k, adjoint row k).
  Matrix<Scalar> system = Matrix<Scalar>::Zero(size, size);
  Vector<Scalar> rhs_center = Vector<Scalar>::Zero(size);
  Vector<Scalar> rhs_prior = Vector<Scalar>::Zero(size);
  for (Index k = 0; k <= N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Index row = stride * k;
    const Index col = stride * k;
    system.block(row, col, m, n) = dae.F[ku];
    if (k == 0) {
      system.block(row, col + n, m, m) = -(dae.S * spd_inverse(bounds.Q0) * dae.S.transpose());
    } else {
      system.block(row, col - stride, m, n) = -dae.C[ku - 1];
      system.block(row, col + n, m, m) =
          -(dae.B[ku - 1] * spd_inverse(bounds.Q1[ku - 1]) * dae.B[ku - 1].transpose());
    }
    const Matrix<Scalar> weighted_h = bounds.Q2[ku] * dae.H[ku];
    system.block(row + m, col, n, n) = dae.H[ku].transpose() * weighted_h;
    system.block(row + m, col + n, n, m) = dae.F[ku].transpose();
    if (k < N) system.block(row + m, col + stride + n, n, m) = -dae.C[ku].transpose();
    rhs_center.segment(row + m, n) = weighted_h.transpose() * y_seq[ku];
    rhs_prior.segment(row + m, n) = ell_seq[ku];
  }

  Eigen::BDCSVD<Matrix<Scalar>> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rank_tol);
  const Vector<Scalar> prior = svd.solve(rhs_prior);
  const Vector<Scalar> ell = stack<Scalar>(ell_seq);

  TrajectoryEstimate<Scalar> out;
  if ((system * prior - rhs_prior).norm() > Scalar(kMembershipTolerance) * (Scalar(1) + ell.norm())) return out;

  const Vector<Scalar> center = svd.solve(rhs_center);
  Scalar data_fit = 0;
  Scalar ell_p = 0;
  out.x_hat.reserve(dae.steps());
  out.p.reserve(dae.steps());
  for (Index k = 0; k <= N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out.x_hat.emplace_back(center.segment(stride * k, n));
    out.p.emplace_back(prior.segment(stride * k, n));
    data_fit += (y_seq[ku] - dae.H[ku] * out.x_hat.back()).dot(bounds.Q2[ku] * y_seq[ku]);
    ell_p += ell_seq[ku].dot(out.p.back());
    out.estimate_value += ell_seq[ku].dot(out.x_hat.back());
  }
  Scalar bracket = Scalar(1) - data_fit;
  if (bracket < Scalar(kBracketClampThreshold)) {
    throw Error(ErrorKind::InconsistentData,
                "observations are inconsistent with the bounding set (bracket " + std::to_string(double(bracket)) + ")");
  }
  bracket = std::max(bracket, Scalar(0));
  out.feasible = true;
  out.sigma_hat = std::sqrt(bracket) * std::sqrt(std::max(Scalar(0), ell_p));
  return out;
}

}  // namespace dminimax
