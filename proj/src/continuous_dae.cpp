#include "descriptor_minimax/continuous_dae.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include <cmath>
#include <string>

namespace dminimax {

namespace {

using Mat = Matrix<double>;
using Vec = Vector<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

void require_shape(const Mat& a, Index rows, Index cols, const std::string& what) {
  if (a.rows() != rows || a.cols() != cols) {
    throw Error(ErrorKind::InvalidInput, what + " is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                             ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Mat spd_at(const TimeFunction& q, double t, const char* what) {
  Mat value = q(t);
  require_spd(value, std::string(what) + "(" + std::to_string(t) + ")");
  return value;
}

void require_grid_inside(const ContinuousDAE& sys, const TimeGrid& grid) {
  grid.validate();
  const double slack = 1e-12 * (1.0 + std::abs(sys.a) + std::abs(sys.c));
  if (grid.a < sys.a - slack || grid.c > sys.c + slack) {
    throw Error(ErrorKind::InvalidGrid, "grid [" + std::to_string(grid.a) + ", " + std::to_string(grid.c) +
                                            "] leaves the interval [" + std::to_string(sys.a) + ", " +
                                            std::to_string(sys.c) + "]");
  }
}

void add_block(Triplets& out, Index row, Index col, const Mat& block) {
  for (Index j = 0; j < block.cols(); ++j) {
    for (Index i = 0; i < block.rows(); ++i) {
      if (block(i, j) != 0.0) out.emplace_back(row + i, col + j, block(i, j));
    }
  }
}

// Solution of the discretized boundary value problem
//
//   F p_0 = alpha Q0^-1 z_0,
//   (F - h C_{k+1}) p_{k+1} - F p_k = alpha h Q1(t_{k+1})^-1 z_{k+1},
//   F' z_0 - F' z_1 + h W_0 p_0 = ell_0,
//   (F - h C_k)' z_k - F' z_{k+1} + h W_k p_k = ell_k,   0 < k < M,
//   (F - h C_M)' z_M + h W_M p_M = ell_M,
//
// with W_k = rho I + H_k' Q2_k H_k / alpha and z_0 = R a + N d split over
// range(F) and ker(F'). Unknowns are ordered per node as (p_k, z_k).
struct BoundaryValueSolution {
  bool consistent{false};
  std::vector<Vec> p;
  std::vector<Vec> z;
};

BoundaryValueSolution solve_boundary_value(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds,
                                           const std::vector<Vec>& ell, const TimeGrid& grid, double alpha,
                                           double rho) {
  const Index n = sys.state_dim();
  const Index m = sys.equation_dim();
  const Index M = grid.steps;
  const double h = grid.step();
  const Mat& F = sys.F;

  const Mat range_f = range_basis(F);
  const Mat null_ft = null_space(Mat(F.transpose()));
  Mat z0_basis(m, range_f.cols() + null_ft.cols());
  z0_basis << range_f, null_ft;

  const Index block = n + m;
  const Index size = block * (M + 1);
  auto p_col = [&](Index k) { return block * k; };
  auto z_col = [&](Index k) { return block * k + n; };

  Triplets entries;
  Vec rhs = Vec::Zero(size);
  Index row = 0;

  // Initial condition, with the z_0 columns expressed in the [R N] basis.
  add_block(entries, row, p_col(0), F);
  add_block(entries, row, z_col(0), Mat(-alpha * spd_inverse(bounds.Q0) * z0_basis));
  row += m;
  for (Index k = 0; k < M; ++k) {
    const double t1 = grid.node(k + 1);
    add_block(entries, row, p_col(k + 1), Mat(F - h * sys.C(t1)));
    add_block(entries, row, p_col(k), Mat(-F));
    add_block(entries, row, z_col(k + 1), Mat(-alpha * h * spd_inverse(spd_at(bounds.Q1, t1, "Q1"))));
    row += m;
  }
  for (Index k = 0; k <= M; ++k) {
    const double t = grid.node(k);
    const Mat Hk = sys.H(t);
    const Mat weight = rho * Mat::Identity(n, n) + Hk.transpose() * spd_at(bounds.Q2, t, "Q2") * Hk / alpha;
    const Mat own = k == 0 ? Mat(F.transpose() * z0_basis) : Mat((F - h * sys.C(t)).transpose());
    add_block(entries, row, z_col(k), own);
    if (k < M) add_block(entries, row, z_col(k + 1), Mat(-F.transpose()));
    add_block(entries, row, p_col(k), Mat(h * weight));
    rhs.segment(row, n) = ell[static_cast<std::size_t>(k)];
    row += n;
  }

  Eigen::SparseMatrix<double> system(size, size);
  system.setFromTriplets(entries.begin(), entries.end());
  system.makeCompressed();

  Vec solution;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() == Eigen::Success) {
    solution = lu.solve(rhs);
  }
  if (solution.size() != size || !solution.allFinite()) {
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(kRankTolerance * system.norm());
    qr.compute(system);
    if (qr.info() != Eigen::Success) throw Error(ErrorKind::SolveFailure, "boundary value system factorization failed");
    solution = qr.solve(rhs);
  }

  BoundaryValueSolution out;
  const double residual = (system * solution - rhs).norm();
  out.consistent = solution.allFinite() && residual <= kMembershipTolerance * (1.0 + rhs.norm());
  for (Index k = 0; k <= M; ++k) {
    out.p.emplace_back(solution.segment(p_col(k), n));
    out.z.emplace_back(k == 0 ? Vec(z0_basis * solution.segment(z_col(0), m)) : Vec(solution.segment(z_col(k), m)));
  }
  return out;
}

void require_samples(const std::vector<Vec>& y, const TimeGrid& grid, Index l) {
  if (y.size() != grid.size()) {
    throw Error(ErrorKind::InvalidInput, "expected " + std::to_string(grid.size()) + " observation samples, got " +
                                             std::to_string(y.size()));
  }
  for (const auto& v : y) {
    if (v.size() != l) throw Error(ErrorKind::InvalidInput, "observation sample has wrong length");
    require_finite(v, "observation sample");
  }
}

}  // namespace

void ContinuousDAE::validate() const {
  if (!std::isfinite(a) || !std::isfinite(c) || !(a < c)) {
    throw Error(ErrorKind::InvalidInput, "interval must satisfy a < c");
  }
  if (F.size() == 0) throw Error(ErrorKind::InvalidInput, "F must be non-empty");
  require_finite(F, "F");
  if (C.empty() || H.empty()) throw Error(ErrorKind::InvalidInput, "C and H must be given");
  require_shape(C(a), F.rows(), F.cols(), "C(a)");
  if (H.rows() < 1) throw Error(ErrorKind::InvalidInput, "H must have at least one row");
  require_shape(H(a), H.rows(), F.cols(), "H(a)");
}

void ContinuousEllipsoid::validate(const ContinuousDAE& sys) const {
  require_shape(Q0, sys.equation_dim(), sys.equation_dim(), "Q0");
  require_spd(Q0, "Q0");
  if (Q1.empty() || Q2.empty()) throw Error(ErrorKind::InvalidInput, "Q1 and Q2 must be given");
  require_shape(Q1(sys.a), sys.equation_dim(), sys.equation_dim(), "Q1");
  require_shape(Q2(sys.a), sys.observation_dim(), sys.observation_dim(), "Q2");
}

TimeGrid TimeGrid::uniform(double a, double c, Index steps) {
  TimeGrid grid{a, c, steps};
  grid.validate();
  return grid;
}

TimeGrid TimeGrid::from_nodes(const std::vector<double>& nodes) {
  if (nodes.size() < 2) throw Error(ErrorKind::InvalidGrid, "grid needs at least two nodes");
  TimeGrid grid{nodes.front(), nodes.back(), static_cast<Index>(nodes.size() - 1)};
  grid.validate();
  const double h = grid.step();
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (std::abs((nodes[k] - nodes[k - 1]) - h) > 1e-12 * (1.0 + std::abs(grid.c - grid.a))) {
      throw Error(ErrorKind::InvalidGrid, "grid nodes are not uniformly spaced");
    }
  }
  return grid;
}

void TimeGrid::validate() const {
  if (!std::isfinite(a) || !std::isfinite(c) || !(a < c)) throw Error(ErrorKind::InvalidGrid, "grid needs a < c");
  if (steps < 1) throw Error(ErrorKind::InvalidGrid, "grid needs at least one step");
}

DiscretizedProblem discretize(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds, const TimeGrid& grid) {
  sys.validate();
  bounds.validate(sys);
  require_grid_inside(sys, grid);
  const Index m = sys.equation_dim();
  const double h = grid.step();

  DiscretizedProblem out;
  auto& dae = out.dae;
  dae.horizon = grid.steps;
  dae.S = Mat::Identity(m, m);
  out.bounds.Q0 = bounds.Q0;
  for (Index k = 0; k <= grid.steps; ++k) {
    const double t = grid.node(k);
    dae.F.push_back(k == 0 ? sys.F : Mat(sys.F - h * sys.C(t)));
    dae.H.push_back(sys.H(t));
    out.bounds.Q2.push_back(h * bounds.Q2(t));
    if (k > 0) {
      dae.C.push_back(sys.F);
      dae.B.push_back(Mat::Identity(m, m));
      out.bounds.Q1.push_back(bounds.Q1(t) / h);
    }
  }
  dae.validate();
  out.bounds.validate(dae);
  return out;
}

std::vector<Vec> quadrature_weights(const TimeFunction& ell, const TimeGrid& grid) {
  grid.validate();
  std::vector<Vec> out;
  const double h = grid.step();
  for (Index k = 0; k <= grid.steps; ++k) {
    const Vec v = ell.vector_at(grid.node(k));
    require_finite(v, "ell");
    out.push_back(k < grid.steps ? Vec(h * v) : Vec(Vec::Zero(v.size())));
  }
  return out;
}

double grid_norm(const std::vector<Vec>& v, double h) {
  double sum = 0.0;
  for (const auto& x : v) sum += x.squaredNorm();
  return std::sqrt(h * sum);
}

ContinuousAprioriResult apriori_estimate_continuous(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds,
                                                    const TimeFunction& ell, const TimeGrid& grid,
                                                    const std::vector<Vec>& y_samples, ContinuousPath path) {
  const auto problem = discretize(sys, bounds, grid);
  const Index n = sys.state_dim();
  const Index m = sys.equation_dim();
  const double h = grid.step();
  if (!y_samples.empty()) require_samples(y_samples, grid, sys.observation_dim());
  const auto ell_seq = quadrature_weights(ell, grid);
  if (static_cast<Index>(ell_seq.front().size()) != n) {
    throw Error(ErrorKind::InvalidInput, "ell must have length " + std::to_string(n));
  }

  ContinuousAprioriResult out;
  if (path == ContinuousPath::flattened) {
    const auto model = flatten(problem.dae);
    const auto ellipsoid = flatten_bounds(problem.bounds, BoundsKind::apriori);
    const auto report = apriori_estimate<double>(model, ellipsoid, stack<double>(ell_seq));
    if (!report.feasible) return out;
    out.p = split(report.p, n, grid.steps + 1);
    out.z = split(report.z_hat, m, grid.steps + 1);
    out.sigma_hat = report.sigma_hat;
  } else {
    auto solved = solve_boundary_value(sys, bounds, ell_seq, grid, 1.0, 0.0);
    if (!solved.consistent) return out;
    out.p = std::move(solved.p);
    out.z = std::move(solved.z);
    double sigma = 0.0;
    for (std::size_t k = 0; k < ell_seq.size(); ++k) sigma += ell_seq[k].dot(out.p[k]);
    out.sigma_hat = std::max(0.0, sigma);
  }
  out.feasible = true;
  for (Index k = 0; k <= grid.steps; ++k) {
    const double t = grid.node(k);
    out.u_hat.push_back(bounds.Q2(t) * sys.H(t) * out.p[static_cast<std::size_t>(k)]);
  }
  if (!y_samples.empty()) {
    double value = 0.0;
    for (std::size_t k = 0; k < y_samples.size(); ++k) value += h * out.u_hat[k].dot(y_samples[k]);
    out.estimate = value;
  }
  return out;
}

TikhonovResult tikhonov_approximate(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds,
                                    const TimeFunction& ell, const TimeGrid& grid,
                                    const std::vector<double>& alpha_seq) {
  const auto problem = discretize(sys, bounds, grid);  // validates shapes and weights
  (void)problem;
  if (alpha_seq.empty()) throw Error(ErrorKind::InvalidInput, "alpha sequence is empty");
  for (std::size_t i = 0; i < alpha_seq.size(); ++i) {
    if (!(alpha_seq[i] > 0) || !std::isfinite(alpha_seq[i])) {
      throw Error(ErrorKind::InvalidInput, "alpha values must be positive");
    }
    if (i > 0 && !(alpha_seq[i] < alpha_seq[i - 1])) {
      throw Error(ErrorKind::InvalidInput, "alpha sequence must be strictly decreasing");
    }
  }
  const auto ell_seq = quadrature_weights(ell, grid);
  const double h = grid.step();

  TikhonovResult out;
  std::vector<std::vector<Vec>> z_runs;
  for (const double alpha : alpha_seq) {
    auto solved = solve_boundary_value(sys, bounds, ell_seq, grid, alpha, 1.0);
    if (!solved.consistent) {
      throw Error(ErrorKind::SolveFailure, "regularized system is numerically singular at alpha=" +
                                               std::to_string(alpha));
    }
    std::vector<Vec> u;
    double sigma = 0.0;
    for (Index k = 0; k <= grid.steps; ++k) {
      const double t = grid.node(k);
      const auto ku = static_cast<std::size_t>(k);
      u.push_back(bounds.Q2(t) * sys.H(t) * solved.p[ku] / alpha);
      sigma += ell_seq[ku].dot(solved.p[ku]) / alpha;
    }
    out.alpha.push_back(alpha);
    out.u_hat.push_back(std::move(u));
    out.sigma.push_back(sigma);
    z_runs.push_back(std::move(solved.z));
  }
  for (std::size_t i = 0; i + 1 < out.u_hat.size(); ++i) {
    std::vector<Vec> du;
    std::vector<Vec> dz;
    for (std::size_t k = 0; k < out.u_hat[i].size(); ++k) {
      du.push_back(out.u_hat[i + 1][k] - out.u_hat[i][k]);
      if (k > 0) dz.push_back(z_runs[i + 1][k] - z_runs[i][k]);
    }
    out.residuals.push_back(grid_norm(du, h) + grid_norm(dz, h) + (z_runs[i + 1][0] - z_runs[i][0]).norm() +
                            std::abs(out.sigma[i + 1] - out.sigma[i]));
  }
  return out;
}

RiccatiResult riccati_filter(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds, const Vec& ell0,
                             const std::vector<Vec>& y_samples, const TimeGrid& grid) {
  sys.validate();
  bounds.validate(sys);
  require_grid_inside(sys, grid);
  const Index n = sys.state_dim();
  if (ell0.size() != n) throw Error(ErrorKind::InvalidInput, "ell0 must have length " + std::to_string(n));
  require_finite(ell0, "ell0");
  require_samples(y_samples, grid, sys.observation_dim());

  const Mat& F = sys.F;
  const Mat F_pinv = pseudo_inverse(F);
  const Mat projector = F * F_pinv;
  const double h = grid.step();

  auto rhs = [&](double t, const Mat& K) {
    const Mat Ct = sys.C(t);
    const Mat Ht = sys.H(t);
    const Mat gain = Ht.transpose() * spd_at(bounds.Q2, t, "Q2") * Ht;
    return Mat(Ct * K + K.transpose() * Ct.transpose() - K.transpose() * gain * K +
               spd_inverse(spd_at(bounds.Q1, t, "Q1")));
  };
  auto check_gain = [](const Mat& K, double t) {
    if (!K.allFinite() || K.norm() > kRiccatiBlowup) {
      throw Error(ErrorKind::RiccatiBlowup, "Riccati gain escapes at t=" + std::to_string(t));
    }
  };

  RiccatiResult out;
  Mat FK = projector * spd_inverse(bounds.Q0) * projector;
  out.K.push_back(F_pinv * FK);
  out.x_hat.push_back(Vec::Zero(n));
  for (Index k = 0; k < grid.steps; ++k) {
    const double t1 = grid.node(k + 1);
    // Implicit Euler on F K, solved by fixed-point iteration from an explicit predictor.
    Mat next = FK + h * rhs(t1, out.K.back());
    bool converged = false;
    for (int iter = 0; iter < 50; ++iter) {
      Mat candidate = FK + h * rhs(t1, Mat(F_pinv * next));
      candidate = 0.5 * (candidate + candidate.transpose());
      check_gain(candidate, t1);
      const double change = (candidate - next).norm();
      next = std::move(candidate);
      if (change <= 1e-14 * (1.0 + next.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged) throw Error(ErrorKind::SolveFailure, "implicit Riccati step did not converge; refine the grid");
    FK = next;
    const Mat K = F_pinv * FK;
    check_gain(K, t1);
    out.K.push_back(K);

    const Mat Ht = sys.H(t1);
    const Mat Q2t = bounds.Q2(t1);
    const Mat step_matrix = F - h * sys.C(t1) + h * K.transpose() * Ht.transpose() * Q2t * Ht;
    const Vec step_rhs = F * out.x_hat.back() + h * K.transpose() * Ht.transpose() * Q2t * y_samples[k + 1];
    const auto solved = solve_least_squares(step_matrix, step_rhs);
    if (solved.rank_estimate < n) {
      throw Error(ErrorKind::RankDeficient, "implicit filter step matrix is singular at t=" + std::to_string(t1));
    }
    out.x_hat.push_back(solved.solution);
  }

  if (!range_membership(Mat(F.transpose()), ell0).member) return out;
  const Vec w = F_pinv.transpose() * ell0;
  out.feasible = true;
  out.estimate = (F * out.x_hat.back()).dot(w);
  out.sigma_hat = std::max(0.0, (FK * w).dot(w));
  return out;
}

}  // namespace dminimax
