#pragma once

#include <vector>

#include "mgcp/cholesky.hpp"
#include "mgcp/covariance.hpp"
#include "mgcp/data.hpp"

namespace mgcp {

/// Pointwise predictive distribution of a noisy observation.
struct GaussianPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// One latent contribution scale^2 * (K * K)(d) to a single-output covariance.
struct LatentTerm {
  KernelSpec kernel;
  double scale = 1.0;
};

/// Single-output convolution-process GP: sum of self-convolution terms plus noise.
struct UnivariateParams {
  std::vector<LatentTerm> terms;
  double sigma = 0.1;

  Index dim() const { return terms.empty() ? 0 : terms.front().kernel.dim(); }
  void validate() const;
  // Noise-free covariance between f(x) and f(x + d).
  double cov(const Eigen::Ref<const Vector>& d) const;
};

// Marginal model of one output of a bivariate submodel (shared and unique terms).
UnivariateParams restrict_to_output(const BivariateParams& params, Side which);

Matrix assemble_univariate_cov(const UnivariateParams& params, const Matrix& X);

// Shared pieces of every predictor: the training factorization and C^{-1} y.
class GpPosterior {
 public:
  GpPosterior(const Matrix& train_cov, const Vector& y);

  // k: covariances between the test value and the training vector; prior: its prior variance.
  GaussianPrediction predict(const Vector& k, double prior) const;
  const Factorization& factorization() const { return factor_; }

 private:
  Factorization factor_;
  Vector alpha_;
};

/// Bivariate predictor holding one factorization for any number of test points.
class BivariateModel {
 public:
  BivariateModel(BivariateParams params, const OutputSeries& data_i, const OutputSeries& data_j);

  GaussianPrediction predict(const Eigen::Ref<const Vector>& x0, Side target) const;
  // Prior marginal variance of a noisy observation of `target`.
  double prior_variance(Side target) const;

 private:
  BivariateParams params_;
  Matrix X_i_, X_j_;
  GpPosterior posterior_;
};

class UnivariateModel {
 public:
  UnivariateModel(UnivariateParams params, const OutputSeries& data);

  GaussianPrediction predict(const Eigen::Ref<const Vector>& x0) const;
  double prior_variance() const;

 private:
  UnivariateParams params_;
  Matrix X_;
  GpPosterior posterior_;
};

class FullModel {
 public:
  FullModel(FullMgcpParams params, const Dataset& data);

  // `target` is the 0-based output position.
  GaussianPrediction predict(const Eigen::Ref<const Vector>& x0, int target) const;
  double prior_variance(int target) const;

 private:
  FullMgcpParams params_;
  std::vector<Matrix> X_;
  GpPosterior posterior_;
};

GaussianPrediction predict_bivariate(const BivariateParams& params, const OutputSeries& data_i,
                                     const OutputSeries& data_j, const Eigen::Ref<const Vector>& x0, Side target);

GaussianPrediction predict_univariate(const UnivariateParams& params, const OutputSeries& data,
                                      const Eigen::Ref<const Vector>& x0);

GaussianPrediction predict_full_mgcp(const FullMgcpParams& params, const Dataset& data,
                                     const Eigen::Ref<const Vector>& x0, int target);

/// Off-diagonal block (first `split` rows, remaining columns) of cov^{-1}.
/// Throws NumericalError when cov is not positive definite.
Matrix precision_block(const Matrix& cov, Index split);

}  // namespace mgcp
