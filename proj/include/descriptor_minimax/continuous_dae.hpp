#pragma once

#include <optional>
#include <vector>

#include "descriptor_minimax/discrete_dae.hpp"
#include "descriptor_minimax/time_function.hpp"

namespace dminimax {

/// d/dt (F x) = C(t) x + f on [a, c], F x(a) = f0, y = H(t) x + eta.
struct ContinuousDAE {
  Matrix<double> F;  // m x n, constant
  TimeFunction C;    // m x n
  TimeFunction H;    // l x n
  double a{0.0};
  double c{1.0};

  Index state_dim() const { return F.cols(); }
  Index equation_dim() const { return F.rows(); }
  Index observation_dim() const { return H.rows(); }
  void validate() const;
};

/// (Q0 f0, f0) + int (Q1 f, f) dt <= 1 and int tr(Q2 R_eta) dt <= 1.
struct ContinuousEllipsoid {
  Matrix<double> Q0;  // m x m
  TimeFunction Q1;    // m x m
  TimeFunction Q2;    // l x l
  void validate(const ContinuousDAE& sys) const;
};

/// Uniform grid t_k = a + k h, k = 0..M.
struct TimeGrid {
  double a{0.0};
  double c{1.0};
  Index steps{1};  // M

  static TimeGrid uniform(double a, double c, Index steps);
  static TimeGrid from_nodes(const std::vector<double>& nodes);

  double step() const { return (c - a) / static_cast<double>(steps); }
  double node(Index k) const { return k == steps ? c : a + static_cast<double>(k) * step(); }
  std::size_t size() const { return static_cast<std::size_t>(steps) + 1; }
  void validate() const;
};

struct DiscretizedProblem {
  DiscreteDAE<double> dae;
  DAEEllipsoid<double> bounds;
};

/// Implicit Euler: F_0 = F, S = I, F_{k+1} = F - h C(t_{k+1}), C_k = F,
/// B_k = I, Q1_k = Q1(t_{k+1}) / h, Q2_k = h Q2(t_k).
DiscretizedProblem discretize(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds, const TimeGrid& grid);

/// Node values of a vector function weighted by the left Riemann rule:
/// h l(t_k) for k < M and zero at t_M.
std::vector<Vector<double>> quadrature_weights(const TimeFunction& ell, const TimeGrid& grid);

enum class ContinuousPath { flattened, boundary_value };

struct ContinuousAprioriResult {
  bool feasible{false};
  std::vector<Vector<double>> u_hat;  // Q2(t_k) H(t_k) p(t_k)
  std::vector<Vector<double>> p;
  std::vector<Vector<double>> z;      // z_0 is the initial multiplier F F^+ z(a) + d
  double sigma_hat{std::numeric_limits<double>::infinity()};
  std::optional<double> estimate;     // sum_k h (u_hat_k, y_k) when samples are given
};

ContinuousAprioriResult apriori_estimate_continuous(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds,
                                                    const TimeFunction& ell, const TimeGrid& grid,
                                                    const std::vector<Vector<double>>& y_samples = {},
                                                    ContinuousPath path = ContinuousPath::flattened);

struct TikhonovResult {
  std::vector<double> alpha;
  std::vector<std::vector<Vector<double>>> u_hat;  // one node sequence per alpha
  std::vector<double> sigma;                       // sum (ell_k, p_k) / alpha per alpha
  std::vector<double> residuals;                   // Cauchy residual between consecutive alphas
};

TikhonovResult tikhonov_approximate(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds,
                                    const TimeFunction& ell, const TimeGrid& grid,
                                    const std::vector<double>& alpha_seq);

struct RiccatiResult {
  bool feasible{false};
  double estimate{0.0};
  double sigma_hat{std::numeric_limits<double>::infinity()};
  std::vector<Matrix<double>> K;      // K(t_k), n x m
  std::vector<Vector<double>> x_hat;  // x_hat(t_k)
};

inline constexpr double kRiccatiBlowup = 1e12;

RiccatiResult riccati_filter(const ContinuousDAE& sys, const ContinuousEllipsoid& bounds, const Vector<double>& ell0,
                             const std::vector<Vector<double>>& y_samples, const TimeGrid& grid);

/// Discrete L2 norm sqrt(sum_k h |v_k|^2).
double grid_norm(const std::vector<Vector<double>>& v, double h);

}  // namespace dminimax
