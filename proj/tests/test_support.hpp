#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "descriptor_minimax/discrete_dae.hpp"
#include "descriptor_minimax/static_minimax.hpp"

namespace testing_support {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

inline Mat random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a;
}

inline Vec random_vector(Rng& rng, Eigen::Index n) { return random_matrix(rng, n, 1); }

inline Mat random_spd(Rng& rng, Eigen::Index d) {
  const Mat a = random_matrix(rng, d, d);
  return a * a.transpose() / double(d) + 0.5 * Mat::Identity(d, d);
}

inline Eigen::Index random_dim(Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return std::uniform_int_distribution<Eigen::Index>(lo, hi)(rng);
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

/// Half-width comparison with an absolute floor: the half-width is a square
/// root of a bracket that can cancel to rounding level, so values near zero
/// agree only to about sqrt(machine epsilon) times the scale.
inline bool half_widths_agree(double a, double b, double rel, double scale) {
  return std::abs(a - b) <= rel * (1.0 + std::abs(b)) + 1e-7 * scale;
}

inline dminimax::StaticModel<double> random_static_model(Rng& rng, Eigen::Index n, Eigen::Index m,
                                                         Eigen::Index p, Eigen::Index l) {
  return {random_matrix(rng, m, n), random_matrix(rng, m, p), random_matrix(rng, l, n)};
}

inline dminimax::StaticEllipsoid<double> random_static_bounds(Rng& rng, Eigen::Index p, Eigen::Index l,
                                                              dminimax::BoundsKind kind) {
  return {random_spd(rng, p), random_spd(rng, l), kind};
}

/// Observations from a member of the static bounding set at quadratic-form
/// level `level` < 1, so the reachability set is non-empty.
inline Vec consistent_static_observations(Rng& rng, const dminimax::StaticModel<double>& model,
                                          const dminimax::StaticEllipsoid<double>& bounds, double level) {
  Mat constraint(model.F.rows(), model.F.cols() + model.B.cols());
  constraint << model.F, -model.B;
  const Mat basis = dminimax::null_space(constraint);
  const Vec t = random_vector(rng, basis.cols());
  const Vec x = basis.topRows(model.F.cols()) * t;
  const Vec f = basis.bottomRows(model.B.cols()) * t;
  const Vec g = random_vector(rng, model.H.rows());
  const double energy = f.dot(bounds.Q1 * f) + g.dot(bounds.Q2 * g);
  const double scale = energy > 0 ? std::sqrt(level / energy) : 0.0;
  return model.H * (scale * x) + scale * g;
}

/// ell = F'a + H'b for random a, b.
inline Vec representable_static_functional(Rng& rng, const dminimax::StaticModel<double>& model) {
  return model.F.transpose() * random_vector(rng, model.F.rows()) +
         model.H.transpose() * random_vector(rng, model.H.rows());
}

struct DaeInstance {
  dminimax::DiscreteDAE<double> dae;
  dminimax::DAEEllipsoid<double> bounds;
};

/// Random DAE with B_k = I, S = I and [F_k; H_k] of full column rank.
inline DaeInstance random_identity_input_dae(Rng& rng, Eigen::Index n, Eigen::Index m, Eigen::Index l,
                                             Eigen::Index horizon) {
  DaeInstance out;
  auto& dae = out.dae;
  dae.horizon = horizon;
  dae.S = Mat::Identity(m, m);
  for (Eigen::Index k = 0; k <= horizon; ++k) {
    Mat f = random_matrix(rng, m, n);
    Mat h = random_matrix(rng, l, n);
    // Resample until [F; H] has full column rank with margin when that is possible.
    for (int attempt = 0; attempt < 100 && m + l >= n; ++attempt) {
      Mat stacked(m + l, n);
      stacked << f, h;
      if (Eigen::JacobiSVD<Mat>(stacked).singularValues()(n - 1) >= 0.3) break;
      f = random_matrix(rng, m, n);
      h = random_matrix(rng, l, n);
    }
    dae.F.push_back(f);
    dae.H.push_back(h);
    out.bounds.Q2.push_back(random_spd(rng, l));
  }
  for (Eigen::Index k = 0; k < horizon; ++k) {
    const Mat c = random_matrix(rng, m, n);
    const double norm = c.operatorNorm();
    dae.C.push_back(norm > 0.7 ? Mat(0.7 / norm * c) : c);
    dae.B.push_back(Mat::Identity(m, m));
    out.bounds.Q1.push_back(random_spd(rng, m));
  }
  out.bounds.Q0 = random_spd(rng, m);
  return out;
}

/// Observations generated from a member of the bounding set scaled to the
/// quadratic-form level `level` < 1, so the reachability set is non-empty.
inline std::vector<Vec> consistent_observations(Rng& rng, const DaeInstance& inst, double level) {
  const auto model = dminimax::flatten(inst.dae);
  const auto ellipsoid = dminimax::flatten_bounds(inst.bounds, dminimax::BoundsKind::aposteriori);
  Mat constraint(model.F.rows(), model.F.cols() + model.B.cols());
  constraint << model.F, -model.B;
  const Mat basis = dminimax::null_space(constraint);
  const Eigen::Index n = model.F.cols();
  Vec t = random_vector(rng, basis.cols());
  Vec x = basis.topRows(n) * t;
  Vec f = basis.bottomRows(model.B.cols()) * t;
  Vec g = random_vector(rng, model.H.rows());
  const double energy = f.dot(ellipsoid.Q1 * f) + g.dot(ellipsoid.Q2 * g);
  const double scale = energy > 0 ? std::sqrt(level / energy) : 0.0;
  const Vec y = model.H * (scale * x) + scale * g;
  return dminimax::split(y, inst.dae.observation_dim(), inst.dae.horizon + 1);
}

/// Independent normal-equations minimizer of
///   (Q0 F_0 x_0, F_0 x_0) + sum (Q1_k r_k, r_k) + sum (Q2_k (y_k - H_k x_k), .),
///   r_k = F_{k+1} x_{k+1} - C_k x_k,
/// valid for B_k = I, S = I. Built entry by entry; shares no code with the
/// estimators.
inline std::vector<Vec> normal_equations_trajectory(const DaeInstance& inst, const std::vector<Vec>& y) {
  const auto& dae = inst.dae;
  const Eigen::Index n = dae.state_dim();
  const Eigen::Index steps = dae.horizon + 1;
  Mat hessian = Mat::Zero(n * steps, n * steps);
  Vec gradient = Vec::Zero(n * steps);
  hessian.block(0, 0, n, n) += dae.F[0].transpose() * inst.bounds.Q0 * dae.F[0];
  for (Eigen::Index k = 0; k < dae.horizon; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    Mat row(dae.equation_dim(), 2 * n);
    row << -dae.C[ku], dae.F[ku + 1];
    hessian.block(n * k, n * k, 2 * n, 2 * n) += row.transpose() * inst.bounds.Q1[ku] * row;
  }
  for (Eigen::Index k = 0; k < steps; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    hessian.block(n * k, n * k, n, n) += dae.H[ku].transpose() * inst.bounds.Q2[ku] * dae.H[ku];
    gradient.segment(n * k, n) += dae.H[ku].transpose() * inst.bounds.Q2[ku] * y[ku];
  }
  const Vec x = hessian.ldlt().solve(gradient);
  return dminimax::split(x, n, steps);
}

/// Interval [lo, hi] of the scalar set {x : q1 (F x / B)^2 + q2 (y - H x)^2 <= 1}
/// by dense bracketing on a fine grid followed by bisection on each edge.
struct Interval {
  double lo;
  double hi;
};

inline Interval scalar_reachability_interval(double F, double B, double H, double q1, double q2, double y) {
  auto form = [&](double x) {
    const double f = F * x / B;
    return q1 * f * f + q2 * (y - H * x) * (y - H * x);
  };
  double best = 0.0;
  double best_val = form(0.0);
  for (int i = -200000; i <= 200000; ++i) {
    const double x = i * 1e-4;
    const double v = form(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  auto edge = [&](double inside, double outside) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      (form(mid) <= 1.0 ? inside : outside) = mid;
    }
    return inside;
  };
  return {edge(best, best - 50.0), edge(best, best + 50.0)};
}

}  // namespace testing_support
