#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "descriptor_minimax/error.hpp"

namespace dminimax {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// Singular values below kRankTolerance * sigma_max are treated as zero.
inline constexpr double kRankTolerance = 1e-10;
// Relative residual threshold for "target lies in the column space".
inline constexpr double kMembershipTolerance = 1e-8;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const std::string& what) {
  if (!a.allFinite()) {
    throw Error(ErrorKind::InvalidInput, what + " has non-finite entries");
  }
}

template <typename Scalar>
struct LinearSolveResult {
  Vector<Scalar> solution;
  Scalar residual_norm{0};
  Index rank_estimate{0};
};

/// Moore-Penrose pseudoinverse by truncated SVD.
///
/// Singular values at or below `tol * sigma_max` are dropped. The returned
/// matrix has shape cols x rows.
template <typename Derived>
Matrix<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& a,
                                                typename Derived::Scalar tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  if (!(tol > 0)) throw Error(ErrorKind::InvalidInput, "pseudo_inverse tolerance must be positive");
  require_finite(a, "pseudo_inverse argument");
  Matrix<Scalar> result = Matrix<Scalar>::Zero(a.cols(), a.rows());
  if (a.size() == 0) return result;

  Eigen::BDCSVD<Matrix<Scalar>> svd(a.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == Scalar(0)) return result;
  const Scalar cutoff = tol * sv(0);
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      result.noalias() += (svd.matrixV().col(i) / sv(i)) * svd.matrixU().col(i).transpose();
    }
  }
  return result;
}

template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& a,
                     typename Derived::Scalar tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<Matrix<Scalar>> svd(a.eval());
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == Scalar(0)) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) ++rank;
  }
  return rank;
}

/// Minimum-norm least-squares solution of a x = b.
///
/// Uses a complete orthogonal decomposition with the rank threshold applied
/// relative to the largest pivot, so singular and rectangular systems are
/// handled uniformly.
template <typename DerivedA, typename DerivedB>
LinearSolveResult<typename DerivedA::Scalar> solve_least_squares(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    typename DerivedA::Scalar tol = kRankTolerance) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::InvalidInput, "solve_least_squares: row count " + std::to_string(a.rows()) +
                                             " does not match rhs length " + std::to_string(b.rows()));
  }
  require_finite(a, "least-squares matrix");
  require_finite(b, "least-squares rhs");

  LinearSolveResult<Scalar> out;
  if (a.cols() == 0) {
    out.solution = Vector<Scalar>::Zero(0);
    out.residual_norm = b.norm();
    return out;
  }
  if (a.rows() == 0) {
    out.solution = Vector<Scalar>::Zero(a.cols());
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod;
  cod.setThreshold(tol);
  cod.compute(a.eval());
  out.rank_estimate = cod.rank();
  out.solution = out.rank_estimate == 0 ? Vector<Scalar>::Zero(a.cols()) : Vector<Scalar>(cod.solve(b.eval()));
  out.residual_norm = (a * out.solution - b).norm();
  return out;
}

template <typename Scalar>
struct RangeMembership {
  bool member{false};
  Vector<Scalar> coefficients;  // empty unless member
};

/// Decides whether `target` lies in the column space of `columns`.
template <typename DerivedA, typename DerivedB>
RangeMembership<typename DerivedA::Scalar> range_membership(
    const Eigen::MatrixBase<DerivedA>& columns, const Eigen::MatrixBase<DerivedB>& target,
    typename DerivedA::Scalar tol = kMembershipTolerance) {
  using Scalar = typename DerivedA::Scalar;
  if (!(tol > 0)) throw Error(ErrorKind::InvalidInput, "range_membership tolerance must be positive");
  auto solved = solve_least_squares(columns, target);
  RangeMembership<Scalar> out;
  if (solved.residual_norm <= tol * (Scalar(1) + target.norm())) {
    out.member = true;
    out.coefficients = std::move(solved.solution);
  }
  return out;
}

/// Orthonormal basis (as columns) of the null space of `a`.
template <typename Derived>
Matrix<typename Derived::Scalar> null_space(const Eigen::MatrixBase<Derived>& a,
                                            typename Derived::Scalar tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  const Index n = a.cols();
  if (a.rows() == 0) return Matrix<Scalar>::Identity(n, n);
  Eigen::BDCSVD<Matrix<Scalar>> svd(a.eval(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  if (sv.size() > 0 && sv(0) > Scalar(0)) {
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol * sv(0)) ++rank;
    }
  }
  return svd.matrixV().rightCols(n - rank);
}

/// Orthonormal basis of the column space of `a`.
template <typename Derived>
Matrix<typename Derived::Scalar> range_basis(const Eigen::MatrixBase<Derived>& a,
                                             typename Derived::Scalar tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  if (a.cols() == 0) return Matrix<Scalar>::Zero(a.rows(), 0);
  Eigen::BDCSVD<Matrix<Scalar>> svd(a.eval(), Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  if (sv.size() > 0 && sv(0) > Scalar(0)) {
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol * sv(0)) ++rank;
    }
  }
  return svd.matrixU().leftCols(rank);
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& q, typename Derived::Scalar rel_tol = 1e-10) {
  if (q.rows() != q.cols()) return false;
  using Scalar = typename Derived::Scalar;
  return (q - q.transpose()).norm() <= rel_tol * (Scalar(1) + q.norm());
}

/// Symmetric positive definite check: symmetric and Cholesky succeeds.
template <typename Derived>
bool is_symmetric_positive_definite(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  if (q.size() == 0 || !q.allFinite() || !is_symmetric(q)) return false;
  Eigen::LLT<Matrix<Scalar>> llt(q.eval());
  if (llt.info() != Eigen::Success) return false;
  return llt.matrixLLT().diagonal().minCoeff() > Scalar(0);
}

template <typename Derived>
void require_spd(const Eigen::MatrixBase<Derived>& q, const std::string& what) {
  if (!is_symmetric_positive_definite(q)) {
    throw Error(ErrorKind::InvalidBounds, what + " is not symmetric positive definite");
  }
}

/// Inverse of an SPD matrix via Cholesky; the caller guarantees SPD.
template <typename Derived>
Matrix<typename Derived::Scalar> spd_inverse(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  Eigen::LLT<Matrix<Scalar>> llt(q.eval());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidBounds, "matrix is not positive definite");
  Matrix<Scalar> inv = llt.solve(Matrix<Scalar>::Identity(q.rows(), q.cols()));
  return Scalar(0.5) * (inv + inv.transpose());
}

template <typename Scalar>
Matrix<Scalar> block_diagonal(std::span<const Matrix<Scalar>> blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix<Scalar> out = Matrix<Scalar>::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> stack(std::span<const Vector<Scalar>> parts) {
  Index n = 0;
  for (const auto& p : parts) n += p.size();
  Vector<Scalar> out(n);
  Index offset = 0;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

template <typename Derived>
std::vector<Vector<typename Derived::Scalar>> split(const Eigen::MatrixBase<Derived>& v, Index block,
                                                    Index count) {
  std::vector<Vector<typename Derived::Scalar>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) out.emplace_back(v.segment(k * block, block));
  return out;
}

}  // namespace dminimax
