#pragma once

#include <vector>

#include "mgcp/data.hpp"
#include "mgcp/optimizer.hpp"
#include "mgcp/predict.hpp"

namespace mgcp {

struct GcpFitResult {
  UnivariateParams params;  // one latent term with unit scale
  double objective = 0.0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

// Coordinates: log amplitude, log Lambda diagonal (D), log sigma.
Vector pack_gcp(const UnivariateParams& params);
UnivariateParams unpack_gcp(const Eigen::Ref<const Vector>& coords);

double gcp_nll(const UnivariateParams& params, const OutputSeries& data);
// Gradient in pack_gcp() coordinates; params must hold a single unit-scale term.
Vector gcp_nll_grad(const UnivariateParams& params, const OutputSeries& data);

/// Independent single-output convolution GP (squared-exponential covariance) fitted by
/// maximum likelihood. Throws DegenerateDataError for constant or too-short outputs.
GcpFitResult fit_gcp(const OutputSeries& data, const OptimizerConfig& cfg);

// N(N-1)(1+D) + N: two kernels (amplitude plus D Lambda entries) per pair latent, one noise per output.
Index full_param_count(int num_outputs, Index dim);

// Largest total number of observations accepted by fit_full_mgcp().
inline constexpr Index kFullMgcpMaxPoints = 500;

// Coordinates, pairs in lexicographic order: log a_qa, log Lambda_qa, log a_qb, log Lambda_qb;
// then log sigma per output. Latent scales are fixed at 1.
Vector pack_full(const FullMgcpParams& params);
FullMgcpParams unpack_full(const Eigen::Ref<const Vector>& coords, int num_outputs, Index dim);

double full_nll(const FullMgcpParams& params, const Dataset& data);
// Gradient in pack_full() coordinates; requires unit latent scales.
Vector full_nll_grad(const FullMgcpParams& params, const Dataset& data);

struct FullFitResult {
  FullMgcpParams params;
  double objective = 0.0;
  bool converged = false;
  std::vector<TracePoint> trace;
  Index param_count = 0;
};

/// Joint maximum-likelihood fit of the full MGCP over all outputs.
/// Throws SizeError when the dataset holds more than kFullMgcpMaxPoints observations.
FullFitResult fit_full_mgcp(const Dataset& data, const OptimizerConfig& cfg);

}  // namespace mgcp
