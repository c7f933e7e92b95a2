#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mgcp/covariance.hpp"

namespace mgcp {

/// Armijo backtracking parameters.
struct LineSearchConfig {
  double initial_step = 1.0;  // first trial step is initial_step / |g| on a fresh direction
  double shrink = 0.5;        // upper bound on the per-backtrack contraction
  double c1 = 1e-4;           // sufficient-decrease constant
  int max_backtracks = 50;
};

struct OptimizerConfig {
  int max_iters = 200;
  double grad_tol = 1e-6;
  int restarts = 5;
  std::uint64_t seed = 0;
  // Std of the N(0, s^2) perturbation applied to the start of restarts after the first.
  double restart_jitter = 0.3;
  LineSearchConfig line_search;

  void validate() const;
};

struct TracePoint {
  int restart = 0;
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
};

// Value at x; fills *grad when non-null. May throw NumericalError, which the
// optimizer treats as an infinite value.
using ObjectiveFn = std::function<double(const Vector& x, Vector* grad)>;
// Start point of a restart derived from the initial point.
using PerturbFn = std::function<Vector(const Vector& init, std::mt19937_64& rng)>;

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  bool converged = false;
  int best_restart = 0;
  int failed_restarts = 0;
  std::vector<TracePoint> trace;
};

/// Polak-Ribiere+ nonlinear conjugate gradient with Armijo backtracking and seeded restarts.
///
/// Restart 0 starts at `init`; restart r > 0 starts at perturb(init, rng) where rng is
/// seeded from cfg.seed. The lowest final value wins, ties going to the earlier restart.
/// Throws OptimizationError when no restart produced a finite start value.
MinimizeResult minimize(const ObjectiveFn& f, const Vector& init, const OptimizerConfig& cfg,
                        const PerturbFn& perturb = {});

}  // namespace mgcp
