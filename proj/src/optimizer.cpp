#include "mgcp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw ArgumentError("grad_tol must be > 0");
  if (restarts < 1) throw ArgumentError("restarts must be >= 1");
  if (!(restart_jitter >= 0.0)) throw ArgumentError("restart_jitter must be >= 0");
  const LineSearchConfig& ls = line_search;
  if (!(ls.initial_step > 0.0)) throw ArgumentError("line search initial step must be > 0");
  if (!(ls.shrink > 0.0 && ls.shrink < 1.0)) throw ArgumentError("line search shrink must lie in (0, 1)");
  if (!(ls.c1 > 0.0 && ls.c1 < 1.0)) throw ArgumentError("line search c1 must lie in (0, 1)");
  if (ls.max_backtracks < 1) throw ArgumentError("line search needs at least one backtrack");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Evaluation {
  double value = kInf;
  Vector grad;
  std::string error;
};

Evaluation evaluate(const ObjectiveFn& f, const Vector& x, bool with_grad) {
  Evaluation e;
  try {
    e.value = f(x, with_grad ? &e.grad : nullptr);
    if (!std::isfinite(e.value) || (with_grad && !e.grad.allFinite())) {
      e.value = kInf;
      e.error = "non-finite objective";
    }
  } catch (const NumericalError& err) {
    e.value = kInf;
    e.error = err.what();
  }
  return e;
}

struct RunResult {
  Vector x;
  double value = kInf;
  bool converged = false;
};

RunResult run_cg(const ObjectiveFn& f, Vector x, Evaluation start, const OptimizerConfig& cfg, int restart,
                 std::vector<TracePoint>& trace) {
  const LineSearchConfig& ls = cfg.line_search;
  double fx = start.value;
  Vector g = std::move(start.grad);
  Vector d = -g;
  Vector g_prev;
  double prev_step = 0.0;
  double prev_slope = 0.0;
  bool fresh = true;
  trace.push_back({restart, 0, fx, g.norm()});

  RunResult out;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (g.norm() < cfg.grad_tol) {
      out.converged = true;
      break;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
      fresh = true;
    }

    double step = fresh ? ls.initial_step / std::max(g.norm(), 1.0) : std::min(1.0, prev_step * prev_slope / slope);
    if (!(step > 0.0) || !std::isfinite(step)) step = ls.initial_step / std::max(g.norm(), 1.0);

    Evaluation trial;
    bool accepted = false;
    for (int k = 0; k < ls.max_backtracks; ++k) {
      trial = evaluate(f, x + step * d, false);
      if (trial.value <= fx + ls.c1 * step * slope) {
        accepted = true;
        break;
      }
      // Safeguarded quadratic interpolation; falls back to plain shrinking on +inf.
      double next = ls.shrink * step;
      if (std::isfinite(trial.value)) {
        const double denom = 2.0 * (trial.value - fx - slope * step);
        if (denom > 0.0) next = std::clamp(-slope * step * step / denom, 0.1 * step, ls.shrink * step);
      }
      step = next;
    }

    // One quadratic refinement of the accepted step; CG needs near-exact line minimization.
    if (accepted && std::isfinite(trial.value)) {
      const double denom = 2.0 * (trial.value - fx - slope * step);
      if (denom > 0.0) {
        const double q = std::clamp(-slope * step * step / denom, 0.1 * step, 4.0 * step);
        if (std::abs(q - step) > 1e-3 * step) {
          const Evaluation refined = evaluate(f, x + q * d, false);
          if (refined.value < trial.value && refined.value <= fx + ls.c1 * q * slope) {
            trial = refined;
            step = q;
          }
        }
      }
    }

    if (!accepted) {
      if (fresh) break;
      // Retry once along steepest descent before giving up.
      d = -g;
      fresh = true;
      --iter;
      continue;
    }

    x += step * d;
    Evaluation at = evaluate(f, x, true);
    if (!std::isfinite(at.value)) {
      x -= step * d;
      break;
    }
    const double decrease = fx - at.value;
    fx = at.value;
    g_prev = std::move(g);
    g = std::move(at.grad);
    trace.push_back({restart, iter, fx, g.norm()});

    const double beta = std::max(0.0, g.dot(g - g_prev) / g_prev.squaredNorm());
    prev_step = step;
    prev_slope = slope;
    d = -g + beta * d;
    fresh = beta == 0.0 || iter % static_cast<int>(x.size() + 1) == 0;
    if (fresh) d = -g;

    if (decrease <= 1e-15 * std::max(1.0, std::abs(fx)) && g.norm() < std::sqrt(cfg.grad_tol)) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged && g.norm() < cfg.grad_tol) out.converged = true;
  out.x = std::move(x);
  out.value = fx;
  return out;
}

}  // namespace

MinimizeResult minimize(const ObjectiveFn& f, const Vector& init, const OptimizerConfig& cfg, const PerturbFn& perturb) {
  cfg.validate();
  if (!init.allFinite()) throw ArgumentError("initial point has non-finite coordinates");

  std::mt19937_64 rng(cfg.seed);
  const PerturbFn jitter = perturb ? perturb : [&cfg](const Vector& x0, std::mt19937_64& r) {
    std::normal_distribution<double> noise(0.0, cfg.restart_jitter);
    Vector x = x0;
    for (Index k = 0; k < x.size(); ++k) x[k] += noise(r);
    return x;
  };

  MinimizeResult best;
  best.value = kInf;
  std::string last_error;
  bool any = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Vector start = r == 0 ? init : jitter(init, rng);
    Evaluation e = evaluate(f, start, true);
    if (!std::isfinite(e.value)) {
      ++best.failed_restarts;
      last_error = e.error;
      continue;
    }
    RunResult run = run_cg(f, std::move(start), std::move(e), cfg, r, best.trace);
    if (!any || run.value < best.value) {
      best.x = std::move(run.x);
      best.value = run.value;
      best.converged = run.converged;
      best.best_restart = r;
      any = true;
    }
  }
  if (!any) {
    throw OptimizationError("all " + std::to_string(cfg.restarts) + " restarts failed: " + last_error);
  }
  return best;
}

}  // namespace mgcp
