#include <random>

#include "descriptor_minimax/cli_io.hpp"

namespace dminimax {

namespace {

using Mat = Matrix<double>;
using Vec = Vector<double>;

/// Draws a point s with |s| = 1 (boundary), |s| <= 1 (uniform) or s = 0 and
/// splits it into blocks w_i = L_i^-T s_i with Q_i = L_i L_i', so that
/// sum (Q_i w_i, w_i) = |s|^2.
class DisturbanceDraw {
 public:
  DisturbanceDraw(const std::vector<Mat>& weights, Disturbance kind, std::uint64_t seed) {
    Index total = 0;
    for (const auto& q : weights) total += q.rows();
    Vec s = Vec::Zero(total);
    if (kind != Disturbance::zero && total > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal;
      double norm = 0;
      while (norm == 0) {
        for (Index i = 0; i < total; ++i) s(i) = normal(rng);
        norm = s.norm();
      }
      s /= norm;
      if (kind == Disturbance::uniform) {
        std::uniform_real_distribution<double> uniform;
        s *= std::pow(uniform(rng), 1.0 / static_cast<double>(total));
      }
    }
    Index offset = 0;
    for (const auto& q : weights) {
      const Index d = q.rows();
      Eigen::LLT<Mat> llt(q);
      if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidBounds, "bound is not positive definite");
      blocks_.emplace_back(llt.matrixU().solve(s.segment(offset, d)));
      form_ += blocks_.back().dot(q * blocks_.back());
      offset += d;
    }
  }

  const Vec& block(std::size_t i) const { return blocks_[i]; }
  double form() const { return form_; }

 private:
  std::vector<Vec> blocks_;
  double form_{0.0};
};

SimulationResult simulate_static(const ProblemConfig& config, Disturbance kind, std::uint64_t seed) {
  const auto& model = config.static_model;
  if (model.F.rows() != model.F.cols() || numerical_rank(model.F) < model.F.cols()) {
    throw Error(ErrorKind::SingularStep, "static simulation needs a square nonsingular F");
  }
  const DisturbanceDraw draw({config.static_bounds.Q1, config.static_bounds.Q2}, kind, seed);
  SimulationResult out;
  out.x.push_back(model.F.fullPivLu().solve(model.B * draw.block(0)));
  out.y.push_back(model.H * out.x.back() + draw.block(1));
  out.form = draw.form();
  return out;
}

SimulationResult simulate_dae(const DiscreteDAE<double>& dae, const DAEEllipsoid<double>& bounds, Disturbance kind,
                              std::uint64_t seed) {
  dae.validate();
  bounds.validate(dae);
  const Index n = dae.state_dim();
  for (std::size_t k = 1; k < dae.steps(); ++k) {
    if (dae.F[k].rows() != n || numerical_rank(dae.F[k]) < n) {
      throw Error(ErrorKind::SingularStep, "F[" + std::to_string(k) + "] is not square and nonsingular");
    }
  }
  // x0g is restricted to directions with S x0g in range(F_0).
  const Mat U = range_basis(dae.F[0]);
  const Mat outside = Mat::Identity(dae.equation_dim(), dae.equation_dim()) - U * U.transpose();
  const Mat V = null_space(Mat(outside * dae.S));

  std::vector<Mat> weights;
  if (V.cols() > 0) weights.push_back(V.transpose() * bounds.Q0 * V);
  for (const auto& q : bounds.Q1) weights.push_back(q);
  for (const auto& q : bounds.Q2) weights.push_back(q);
  const DisturbanceDraw draw(weights, kind, seed);
  std::size_t next = 0;
  const Vec x0g = V.cols() > 0 ? Vec(V * draw.block(next++)) : Vec(Vec::Zero(dae.equation_dim()));

  SimulationResult out;
  out.x.push_back(pseudo_inverse(dae.F[0]) * (dae.S * x0g));
  for (std::size_t k = 1; k < dae.steps(); ++k) {
    const Vec rhs = dae.C[k - 1] * out.x.back() + dae.B[k - 1] * draw.block(next++);
    out.x.push_back(dae.F[k].fullPivLu().solve(rhs));
  }
  for (std::size_t k = 0; k < dae.steps(); ++k) out.y.push_back(dae.H[k] * out.x[k] + draw.block(next++));
  out.form = draw.form();
  return out;
}

}  // namespace

SimulationResult simulate(const ProblemConfig& config, Disturbance disturbance, std::uint64_t seed) {
  switch (config.kind) {
    case ProblemKind::static_model:
      return simulate_static(config, disturbance, seed);
    case ProblemKind::discrete_dae:
      return simulate_dae(config.dae, config.dae_bounds, disturbance, seed);
    case ProblemKind::continuous_dae: {
      const auto problem = discretize(config.continuous, config.continuous_bounds, config.grid());
      return simulate_dae(problem.dae, problem.bounds, disturbance, seed);
    }
  }
  throw Error(ErrorKind::InvalidInput, "unknown problem kind");
}

}  // namespace dminimax
