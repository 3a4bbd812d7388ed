#include "descriptor_minimax/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace dminimax {

namespace {

using Mat = Matrix<double>;
using Vec = Vector<double>;

constexpr std::size_t kChunk = 4096;
constexpr double kEigenFloor = 1e-12;
constexpr double kRoundingAllowance = 1e-12;

bool is_boundary(std::size_t i, double fraction) {
  return std::floor(static_cast<double>(i + 1) * fraction) > std::floor(static_cast<double>(i) * fraction);
}

}  // namespace

int oracle_threads(int requested) {
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("DESCRIPTOR_MINIMAX_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) workers = std::min(workers, cap);
  }
  if (requested > 0) workers = std::min(workers, requested);
  return workers;
}

ReachabilitySampling sample_reachability(const StaticModel<double>& model, const StaticEllipsoid<double>& bounds,
                                         const Vec& y, std::size_t count, std::uint64_t seed,
                                         const SamplingOptions& options) {
  model.validate();
  bounds.validate(model);
  const Index n = model.state_dim();
  const Index p = model.input_dim();
  if (n > kMaxOracleDimension || p > kMaxOracleDimension) {
    throw Error(ErrorKind::DimensionTooLarge, "oracle sampling supports at most " +
                                                  std::to_string(kMaxOracleDimension) + " states and inputs");
  }
  if (count < 1) throw Error(ErrorKind::InvalidInput, "sample count must be positive");
  if (y.size() != model.observation_dim()) throw Error(ErrorKind::InvalidInput, "y has wrong length");
  require_finite(y, "y");
  if (!(options.boundary_fraction >= 0.0 && options.boundary_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidInput, "boundary fraction must lie in [0, 1]");
  }

  // w = (x, f) = N t parameterizes Fx = Bf.
  Mat constraint(model.equation_dim(), n + p);
  constraint << model.F, -model.B;
  const Mat basis = null_space(constraint);
  const Mat Nx = basis.topRows(n);
  const Mat Nf = basis.bottomRows(p);
  const Mat HN = model.H * Nx;

  // form(t) = t'At - 2b't + c.
  const Mat A = Nf.transpose() * bounds.Q1 * Nf + HN.transpose() * bounds.Q2 * HN;
  const Vec b = HN.transpose() * (bounds.Q2 * y);
  const double c = y.dot(bounds.Q2 * y);

  ReachabilitySampling out;
  Vec center = Vec::Zero(basis.cols());
  Mat axes = Mat::Zero(basis.cols(), 0);
  double level = 1.0 - c;
  if (basis.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(Mat(0.5 * (A + A.transpose())));
    const Vec& lambda = eig.eigenvalues();
    const double top = std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
    std::vector<Index> kept;
    for (Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) > kEigenFloor * top && lambda(i) > 0) kept.push_back(i);
    }
    out.unbounded_dims = basis.cols() - static_cast<Index>(kept.size());
    axes.resize(basis.cols(), static_cast<Index>(kept.size()));
    Vec coords = eig.eigenvectors().transpose() * b;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const Index i = kept[j];
      center += eig.eigenvectors().col(i) * (coords(i) / lambda(i));
      axes.col(static_cast<Index>(j)) = eig.eigenvectors().col(i) / std::sqrt(lambda(i));
    }
    level = 1.0 - (c - b.dot(center));
  }
  out.min_form = 1.0 - level;
  out.reduced_dim = axes.cols();
  if (level < 0) {
    out.empty = true;
    return out;
  }
  const double radius = std::sqrt(level);
  const Index d = axes.cols();

  out.samples.resize(count);
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  auto run_chunk = [&](std::size_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const std::size_t begin = chunk * kChunk;
    const std::size_t end = std::min(count, begin + kChunk);
    for (std::size_t i = begin; i < end; ++i) {
      auto& sample = out.samples[i];
      sample.boundary = is_boundary(i, options.boundary_fraction);
      Vec s = Vec::Zero(d);
      if (d > 0) {
        double norm = 0.0;
        while (norm == 0.0) {
          for (Index j = 0; j < d; ++j) s(j) = normal(rng);
          norm = s.norm();
        }
        s /= norm;
        if (!sample.boundary) s *= std::pow(uniform(rng), 1.0 / static_cast<double>(d));
      }
      const Vec t = center + axes * (radius * s);
      sample.x = Nx * t;
      sample.f = Nf * t;
      const Vec g = y - model.H * sample.x;
      sample.form = sample.f.dot(bounds.Q1 * sample.f) + g.dot(bounds.Q2 * g);
    }
  };

  const int workers = std::min<int>(oracle_threads(options.threads), static_cast<int>(chunks));
  if (workers <= 1) {
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) run_chunk(chunk);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t chunk = static_cast<std::size_t>(w); chunk < chunks; chunk += static_cast<std::size_t>(workers)) {
          run_chunk(chunk);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

ChebyshevCheck chebyshev_check(const std::vector<ReachabilitySample>& samples, const Vec& ell, double estimate,
                               double sigma_hat) {
  if (samples.empty()) throw Error(ErrorKind::InvalidInput, "chebyshev_check needs at least one sample");
  ChebyshevCheck out;
  const double bound = sigma_hat * (1.0 + 1e-9);
  for (const auto& s : samples) {
    if (s.x.size() != ell.size()) throw Error(ErrorKind::InvalidInput, "sample and functional lengths differ");
    const double value = ell.dot(s.x);
    const double dev = std::abs(value - estimate);
    out.max_dev = std::max(out.max_dev, dev);
    // Rounding allowance for (ell, x) and the estimate themselves.
    const double rounding = kRoundingAllowance * ell.norm() * (1.0 + s.x.norm()) +
                            64 * std::numeric_limits<double>::epsilon() * std::abs(estimate);
    if (dev > bound + rounding) ++out.violations;
  }
  return out;
}

Vec quadratic_center_oracle(const StaticModel<double>& model, const StaticEllipsoid<double>& bounds, const Vec& y) {
  model.validate();
  bounds.validate(model);
  if (y.size() != model.observation_dim()) throw Error(ErrorKind::InvalidInput, "y has wrong length");
  if (model.B.rows() != model.B.cols()) throw Error(ErrorKind::InvalidInput, "oracle requires a square B");
  Eigen::FullPivLU<Mat> lu(model.B);
  if (!lu.isInvertible()) throw Error(ErrorKind::InvalidInput, "oracle requires an invertible B");

  const Mat G = lu.solve(model.F);  // f(x) = G x
  const Index n = model.state_dim();
  Mat normal = Mat::Zero(n, n);
  Vec rhs = Vec::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      normal(i, j) = G.col(i).dot(bounds.Q1 * G.col(j)) + model.H.col(i).dot(bounds.Q2 * model.H.col(j));
    }
    rhs(i) = model.H.col(i).dot(bounds.Q2 * y);
  }
  normal = 0.5 * (normal + normal.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(normal);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0) || eig.eigenvalues().minCoeff() <= kEigenFloor * top) {
    throw Error(ErrorKind::SingularNormalEquations, "normal equations are singular");
  }
  return eig.eigenvectors() * (eig.eigenvectors().transpose() * rhs).cwiseQuotient(eig.eigenvalues());
}

}  // namespace dminimax
