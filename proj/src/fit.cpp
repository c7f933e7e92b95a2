#include "mgcp/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

namespace {

double sample_variance(const Vector& y) {
  if (y.size() < 2) return 0.0;
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Per-dimension 1 / median^2 of within-output pairwise distances, pooled over outputs.
Vector median_distance_lengthscales(const Matrix& Xi, const Matrix& Xj) {
  Vector l(Xi.cols());
  for (Index c = 0; c < Xi.cols(); ++c) {
    std::vector<double> dists;
    for (const Matrix* X : {&Xi, &Xj}) {
      for (Index r = 0; r < X->rows(); ++r) {
        for (Index s = 0; s < r; ++s) dists.push_back(std::abs((*X)(r, c) - (*X)(s, c)));
      }
    }
    const double m = median(std::move(dists));
    l[c] = m > 0.0 ? 1.0 / (m * m) : 1.0;
  }
  return l;
}

}  // namespace

BivariateParams initialize_params(const OutputSeries& data_i, const OutputSeries& data_j) {
  if (data_i.size() < 1 || data_j.size() < 1) throw ArgumentError("initialization needs nonempty data");
  if (data_i.X.cols() != data_j.X.cols()) throw ArgumentError("outputs have different input dimensions");
  const double var_i = sample_variance(data_i.y);
  const double var_j = sample_variance(data_j.y);
  if (!(var_i > 0.0)) throw DegenerateDataError("output " + std::to_string(data_i.id) + " has zero variance");
  if (!(var_j > 0.0)) throw DegenerateDataError("output " + std::to_string(data_j.id) + " has zero variance");

  const Vector lengths = median_distance_lengthscales(data_i.X, data_j.X);

  constexpr double kNoiseFraction = 0.01;
  constexpr double kSharedFraction = 0.25;
  const double f_i = (1.0 - kNoiseFraction) * var_i;
  const double f_j = (1.0 - kNoiseFraction) * var_j;

  BivariateParams p;
  p.k_0i = KernelSpec{std::pow(var_i / var_j, 0.25), lengths};
  p.k_0j = KernelSpec{std::pow(var_j / var_i, 0.25), lengths};
  p.xi0 = std::sqrt(kSharedFraction) * std::pow(f_i * f_j, 0.25);
  p.k_ii = KernelSpec{std::sqrt((1.0 - kSharedFraction) * f_i), lengths};
  p.k_jj = KernelSpec{std::sqrt((1.0 - kSharedFraction) * f_j), lengths};
  p.xi_i = 1.0;
  p.xi_j = 1.0;
  p.sigma_i = std::sqrt(kNoiseFraction * var_i);
  p.sigma_j = std::sqrt(kNoiseFraction * var_j);
  return p;
}

BivariateParams jitter_params(const BivariateParams& params, std::mt19937_64& rng, double s) {
  std::normal_distribution<double> noise(0.0, s);
  const auto factor = [&] { return std::exp(noise(rng)); };
  BivariateParams p = params;
  for (KernelSpec* k : {&p.k_0i, &p.k_0j, &p.k_ii, &p.k_jj}) {
    k->amplitude *= factor();
    for (Index c = 0; c < k->dim(); ++c) k->lengthscale_diag[c] *= factor();
  }
  p.sigma_i *= factor();
  p.sigma_j *= factor();
  p.xi0 *= factor();
  return p;
}

FitResult fit_bivariate(const OutputSeries& data_i, const OutputSeries& data_j, const PenaltyConfig& penalty_cfg,
                        const OptimizerConfig& cfg, const LayoutOptions& layout_options) {
  penalty_cfg.validate();
  cfg.validate();
  if (data_i.size() < 2 || data_j.size() < 2) {
    throw DegenerateDataError("bivariate fit needs at least two observations per output");
  }

  const ParamLayout layout(data_i.X.cols(), layout_options);
  const BivariateParams start = initialize_params(data_i, data_j);
  const BivariateObjective objective(data_i, data_j, penalty_cfg, layout);

  const ObjectiveFn f = [&objective](const Vector& x, Vector* g) { return objective(x, g); };
  const PerturbFn perturb = [&layout, &cfg](const Vector& x0, std::mt19937_64& rng) {
    return layout.pack(jitter_params(layout.unpack(x0), rng, cfg.restart_jitter));
  };
  MinimizeResult run = minimize(f, layout.pack(start), cfg, perturb);

  // The likelihood is even in xi0, so under a sparse penalty xi0 = 0 is always a local
  // minimum. Multiplicative restarts never reach it; fit that basin explicitly.
  if (penalty_cfg.is_sparse()) {
    BivariateParams independent = start;
    independent.xi0 = 0.0;
    OptimizerConfig single = cfg;
    single.restarts = 1;
    try {
      MinimizeResult alt = minimize(f, layout.pack(independent), single);
      for (TracePoint& t : alt.trace) t.restart = cfg.restarts;
      run.trace.insert(run.trace.end(), alt.trace.begin(), alt.trace.end());
      if (alt.value < run.value) {
        alt.trace = std::move(run.trace);
        run = std::move(alt);
      }
    } catch (const OptimizationError&) {
      // The penalized start already succeeded; keep it.
    }
  }

  FitResult out;
  out.params = layout.unpack(run.x);
  out.converged = run.converged;
  out.trace = std::move(run.trace);
  out.lambda_used = penalty_cfg.lambda;
  // Only xi0^2 enters the covariance; report the nonnegative representative.
  out.params.xi0 = std::abs(out.params.xi0);
  if (penalty_cfg.is_sparse() && out.params.xi0 < kSparsityThreshold) {
    out.params.xi0 = 0.0;
    out.xi0_zeroed = true;
  }
  out.objective = penalized_nll(out.params, data_i, data_j, penalty_cfg);
  return out;
}

}  // namespace mgcp
