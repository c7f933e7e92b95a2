#pragma once

#include <random>
#include <vector>

#include "mgcp/covariance.hpp"
#include "mgcp/data.hpp"
#include "mgcp/likelihood.hpp"
#include "mgcp/optimizer.hpp"

namespace mgcp {

struct FitResult {
  BivariateParams params;
  // Penalized objective at params, with the exact (unsmoothed) penalty.
  double objective = 0.0;
  bool converged = false;
  std::vector<TracePoint> trace;
  double lambda_used = 0.0;
  // |xi0| fell below kSparsityThreshold under a sparse penalty and was set to 0.
  bool xi0_zeroed = false;
};

/// Deterministic starting point for a bivariate fit.
///
/// Lambda diagonals are 1 / median^2 of the per-dimension pairwise input distances
/// over both outputs. Each output's prior variance is matched to its sample variance,
/// split one quarter shared and three quarters unique, after reserving sigma^2 =
/// (0.1 * sample std)^2 for noise. Shared amplitudes are balanced so that xi0 carries
/// the shared magnitude; with unit-variance outputs xi0 starts near 0.5.
/// Throws DegenerateDataError for a constant output.
BivariateParams initialize_params(const OutputSeries& data_i, const OutputSeries& data_j);

// Multiplies every amplitude, Lambda entry, sigma and xi0 by exp(N(0, s^2)).
BivariateParams jitter_params(const BivariateParams& params, std::mt19937_64& rng, double s = 0.3);

/// Penalized maximum-likelihood fit of one bivariate submodel.
///
/// Minimizes the smoothed penalized objective from initialize_params(), then, for sparse
/// penalties, sets |xi0| < kSparsityThreshold to exactly zero and reports the exact
/// penalized objective at the returned parameters.
FitResult fit_bivariate(const OutputSeries& data_i, const OutputSeries& data_j, const PenaltyConfig& penalty,
                        const OptimizerConfig& cfg, const LayoutOptions& layout = {});

}  // namespace mgcp
