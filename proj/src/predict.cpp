#include "mgcp/predict.hpp"

#include <algorithm>
#include <cmath>

#include "mgcp/errors.hpp"

namespace mgcp {

namespace {

// Smallest variance reported, relative to the prior.
constexpr double kVarianceFloor = 1e-12;

void check_point(const Eigen::Ref<const Vector>& x0, Index dim) {
  if (x0.size() != dim) throw ArgumentError("test point dimension does not match the model");
}

Vector stack(const Vector& a, const Vector& b) {
  Vector y(a.size() + b.size());
  y << a, b;
  return y;
}

}  // namespace

void UnivariateParams::validate() const {
  if (terms.empty()) throw ArgumentError("univariate model needs at least one latent term");
  for (const LatentTerm& t : terms) {
    t.kernel.validate();
    if (t.kernel.dim() != dim()) throw ArgumentError("latent terms have different dimensions");
    if (!std::isfinite(t.scale)) throw ArgumentError("latent scale must be finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be positive");
}

double UnivariateParams::cov(const Eigen::Ref<const Vector>& d) const {
  double v = 0.0;
  for (const LatentTerm& t : terms) v += cross_cov_term(t.kernel, t.kernel, t.scale, d);
  return v;
}

UnivariateParams restrict_to_output(const BivariateParams& params, Side which) {
  UnivariateParams u;
  u.terms.push_back({params.shared_kernel(which), params.xi0});
  u.terms.push_back({params.unique_kernel(which), params.unique_scale(which)});
  u.sigma = params.sigma(which);
  return u;
}

Matrix assemble_univariate_cov(const UnivariateParams& params, const Matrix& X) {
  params.validate();
  if (X.cols() != params.dim()) throw ArgumentError("input dimension does not match kernel dimension");
  const Index n = X.rows();
  Matrix C = Matrix::Zero(n, n);
  for (const LatentTerm& t : params.terms) {
    const ProductTerm term(t.kernel, t.kernel, t.scale);
    for (Index r = 0; r < n; ++r) {
      for (Index s = 0; s <= r; ++s) C(r, s) += term.at(X, r, X, s);
    }
  }
  C.diagonal().array() += params.sigma * params.sigma;
  C.triangularView<Eigen::StrictlyUpper>() = C.transpose();
  if (!C.allFinite()) throw NumericalError("covariance matrix has non-finite entries");
  return C;
}

GpPosterior::GpPosterior(const Matrix& train_cov, const Vector& y) : factor_(factorize(train_cov)) {
  if (y.size() != train_cov.rows()) throw ArgumentError("response length does not match covariance size");
  alpha_ = factor_.solve(y);
}

GaussianPrediction GpPosterior::predict(const Vector& k, double prior) const {
  const Vector v = factor_.half_solve(k);
  GaussianPrediction out;
  out.mean = k.dot(alpha_);
  out.variance = std::max(prior - v.squaredNorm(), kVarianceFloor * prior);
  if (!std::isfinite(out.mean) || !std::isfinite(out.variance)) throw NumericalError("non-finite prediction");
  return out;
}

BivariateModel::BivariateModel(BivariateParams params, const OutputSeries& data_i, const OutputSeries& data_j)
    : params_(std::move(params)),
      X_i_(data_i.X),
      X_j_(data_j.X),
      posterior_(assemble_bivariate_cov(params_, data_i.X, data_j.X), stack(data_i.y, data_j.y)) {}

double BivariateModel::prior_variance(Side target) const {
  const Vector zero = Vector::Zero(params_.dim());
  const double s = params_.sigma(target);
  return marginal_cov(params_, target, zero) + s * s;
}

GaussianPrediction BivariateModel::predict(const Eigen::Ref<const Vector>& x0, Side target) const {
  check_point(x0, params_.dim());
  const Index pi = X_i_.rows();
  Vector k(pi + X_j_.rows());
  Vector d(params_.dim());
  for (Index r = 0; r < pi; ++r) {
    d = X_i_.row(r).transpose() - x0;
    k[r] = target == Side::I ? marginal_cov(params_, Side::I, d) : cross_cov(params_, d);
  }
  for (Index r = 0; r < X_j_.rows(); ++r) {
    d = X_j_.row(r).transpose() - x0;
    k[pi + r] = target == Side::J ? marginal_cov(params_, Side::J, d) : cross_cov(params_, d);
  }
  return posterior_.predict(k, prior_variance(target));
}

UnivariateModel::UnivariateModel(UnivariateParams params, const OutputSeries& data)
    : params_(std::move(params)), X_(data.X), posterior_(assemble_univariate_cov(params_, data.X), data.y) {}

double UnivariateModel::prior_variance() const {
  return params_.cov(Vector::Zero(params_.dim())) + params_.sigma * params_.sigma;
}

GaussianPrediction UnivariateModel::predict(const Eigen::Ref<const Vector>& x0) const {
  check_point(x0, params_.dim());
  Vector k(X_.rows());
  for (Index r = 0; r < X_.rows(); ++r) k[r] = params_.cov(X_.row(r).transpose() - x0);
  return posterior_.predict(k, prior_variance());
}

namespace {

std::vector<Matrix> inputs_of(const Dataset& data) {
  std::vector<Matrix> X;
  for (const OutputSeries& s : data.outputs) X.push_back(s.X);
  return X;
}

Vector responses_of(const Dataset& data) {
  Index n = 0;
  for (const OutputSeries& s : data.outputs) n += s.size();
  Vector y(n);
  Index k = 0;
  for (const OutputSeries& s : data.outputs) {
    y.segment(k, s.size()) = s.y;
    k += s.size();
  }
  return y;
}

}  // namespace

FullModel::FullModel(FullMgcpParams params, const Dataset& data)
    : params_(std::move(params)),
      X_(inputs_of(data)),
      posterior_(assemble_full_cov(params_, X_), responses_of(data)) {}

double FullModel::prior_variance(int target) const {
  if (target < 0 || target >= params_.num_outputs) throw ArgumentError("target output out of range");
  double v = 0.0;
  const Vector zero = Vector::Zero(X_.front().cols());
  for (int b = 0; b < params_.num_outputs; ++b) {
    if (b == target) continue;
    const OutputPair key = make_pair_key(target, b);
    const KernelSpec& k = params_.kernel(key, target);
    v += cross_cov_term(k, k, params_.scale(key), zero);
  }
  return v + params_.noise[target] * params_.noise[target];
}

GaussianPrediction FullModel::predict(const Eigen::Ref<const Vector>& x0, int target) const {
  if (target < 0 || target >= params_.num_outputs) throw ArgumentError("target output out of range");
  check_point(x0, X_.front().cols());
  Index n = 0;
  for (const Matrix& X : X_) n += X.rows();
  Vector k(n);
  Index offset = 0;
  for (int b = 0; b < params_.num_outputs; ++b) {
    const Matrix& X = X_[static_cast<std::size_t>(b)];
    std::vector<ProductTerm> terms;
    if (b == target) {
      for (int c = 0; c < params_.num_outputs; ++c) {
        if (c == target) continue;
        const OutputPair key = make_pair_key(target, c);
        terms.emplace_back(params_.kernel(key, target), params_.kernel(key, target), params_.scale(key));
      }
    } else {
      const OutputPair key = make_pair_key(target, b);
      terms.emplace_back(params_.kernel(key, target), params_.kernel(key, b), params_.scale(key));
    }
    Vector d(X.cols());
    for (Index r = 0; r < X.rows(); ++r) {
      d = X.row(r).transpose() - x0;
      double v = 0.0;
      for (const ProductTerm& t : terms) v += t(d.data());
      k[offset + r] = v;
    }
    offset += X.rows();
  }
  return posterior_.predict(k, prior_variance(target));
}

GaussianPrediction predict_bivariate(const BivariateParams& params, const OutputSeries& data_i,
                                     const OutputSeries& data_j, const Eigen::Ref<const Vector>& x0, Side target) {
  return BivariateModel(params, data_i, data_j).predict(x0, target);
}

GaussianPrediction predict_univariate(const UnivariateParams& params, const OutputSeries& data,
                                      const Eigen::Ref<const Vector>& x0) {
  return UnivariateModel(params, data).predict(x0);
}

GaussianPrediction predict_full_mgcp(const FullMgcpParams& params, const Dataset& data,
                                     const Eigen::Ref<const Vector>& x0, int target) {
  return FullModel(params, data).predict(x0, target);
}

Matrix precision_block(const Matrix& cov, Index split) {
  if (cov.rows() != cov.cols()) throw ArgumentError("covariance must be square");
  if (split < 0 || split > cov.rows()) throw ArgumentError("partition index out of range");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("precision_block: matrix is not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(cov.rows(), cov.cols()));
  return inv.topRightCorner(split, cov.cols() - split);
}

}  // namespace mgcp
