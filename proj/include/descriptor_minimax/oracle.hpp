#pragma once

#include <cstdint>
#include <vector>

#include "descriptor_minimax/static_minimax.hpp"

namespace dminimax {

inline constexpr Index kMaxOracleDimension = 64;

struct ReachabilitySample {
  Vector<double> x;
  Vector<double> f;
  bool boundary{false};
  double form{0.0};  // (Q1 f, f) + (Q2 (y - Hx), y - Hx)
};

struct ReachabilitySampling {
  bool empty{false};               // X is empty for this y
  Index reduced_dim{0};            // dimension of the sampled ellipsoid
  Index unbounded_dims{0};         // directions along which X is unbounded (not sampled)
  double min_form{0.0};            // smallest attainable quadratic form value
  std::vector<ReachabilitySample> samples;
};

struct SamplingOptions {
  double boundary_fraction{0.5};
  int threads{0};  // 0: DESCRIPTOR_MINIMAX_THREADS or hardware concurrency
};

/// Seeded samples of X = {x : Fx = Bf, (Q1 f, f) + (Q2 (y - Hx), y - Hx) <= 1}.
/// The equality constraints are solved by a null-space basis and the induced
/// ellipsoid is sampled in reduced coordinates. Samples are produced in fixed
/// chunks with per-chunk streams, so the result does not depend on threads.
ReachabilitySampling sample_reachability(const StaticModel<double>& model, const StaticEllipsoid<double>& bounds,
                                         const Vector<double>& y, std::size_t count, std::uint64_t seed,
                                         const SamplingOptions& options = {});

struct ChebyshevCheck {
  double max_dev{0.0};
  std::size_t violations{0};
};

ChebyshevCheck chebyshev_check(const std::vector<ReachabilitySample>& samples, const Vector<double>& ell,
                               double estimate, double sigma_hat);

/// Minimizer of (Q1 f(x), f(x)) + (Q2 (y - Hx), y - Hx) with f(x) = B^-1 F x,
/// from dense normal equations. Requires B square and invertible.
Vector<double> quadratic_center_oracle(const StaticModel<double>& model, const StaticEllipsoid<double>& bounds,
                                       const Vector<double>& y);

/// Worker count: DESCRIPTOR_MINIMAX_THREADS if set and positive, else the
/// hardware concurrency, capped by `requested` when that is positive.
int oracle_threads(int requested = 0);

}  // namespace dminimax
