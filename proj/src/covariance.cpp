#include "mgcp/covariance.hpp"

#include <cmath>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

void check_dims(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw ArgumentError(std::string(what) + ": expected dimension " + std::to_string(expected) + ", got " +
                        std::to_string(got));
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (!std::isfinite(amplitude)) throw ArgumentError("kernel amplitude must be finite");
  if (lengthscale_diag.size() == 0) throw ArgumentError("kernel has no input dimensions");
  for (Index c = 0; c < lengthscale_diag.size(); ++c) {
    const double l = lengthscale_diag[c];
    if (!(l > 0.0) || !std::isfinite(l)) throw ArgumentError("kernel lengthscale entries must be positive and finite");
  }
}

KernelSpec KernelSpec::isotropic(double amplitude, double lengthscale, Index dim) {
  return KernelSpec{amplitude, Vector::Constant(dim, lengthscale)};
}

void BivariateParams::validate() const {
  for (const KernelSpec* k : {&k_0i, &k_0j, &k_ii, &k_jj}) {
    k->validate();
    check_dims(k_0i.dim(), k->dim(), "bivariate kernels");
  }
  if (!std::isfinite(xi0) || !std::isfinite(xi_i) || !std::isfinite(xi_j)) {
    throw ArgumentError("latent scales must be finite");
  }
  if (!(sigma_i > 0.0) || !(sigma_j > 0.0) || !std::isfinite(sigma_i) || !std::isfinite(sigma_j)) {
    throw ArgumentError("noise standard deviations must be positive and finite");
  }
}

void FullMgcpParams::validate() const {
  if (num_outputs < 2) throw ArgumentError("full MGCP needs at least two outputs");
  if (noise.size() != num_outputs) throw ArgumentError("noise vector length must equal number of outputs");
  for (Index k = 0; k < noise.size(); ++k) {
    if (!(noise[k] > 0.0) || !std::isfinite(noise[k])) throw ArgumentError("noise must be positive and finite");
  }
  Index dim = -1;
  for (int a = 0; a < num_outputs; ++a) {
    for (int b = a + 1; b < num_outputs; ++b) {
      const auto it = pair_kernels.find({a, b});
      if (it == pair_kernels.end() || latent_scales.find({a, b}) == latent_scales.end()) {
        throw ConfigError("missing latent for output pair (" + std::to_string(a) + ", " + std::to_string(b) + ")");
      }
      it->second.first.validate();
      it->second.second.validate();
      if (dim < 0) dim = it->second.first.dim();
      check_dims(dim, it->second.first.dim(), "full MGCP kernels");
      check_dims(dim, it->second.second.dim(), "full MGCP kernels");
      if (!std::isfinite(latent_scales.at({a, b}))) throw ArgumentError("latent scales must be finite");
    }
  }
}

const KernelSpec& FullMgcpParams::kernel(const OutputPair& pair, int output) const {
  const auto it = pair_kernels.find(pair);
  if (it == pair_kernels.end()) {
    throw ConfigError("missing latent for output pair (" + std::to_string(pair.first) + ", " +
                      std::to_string(pair.second) + ")");
  }
  if (output == pair.first) return it->second.first;
  if (output == pair.second) return it->second.second;
  throw ArgumentError("output does not belong to the latent's pair");
}

double FullMgcpParams::scale(const OutputPair& pair) const {
  const auto it = latent_scales.find(pair);
  if (it == latent_scales.end()) {
    throw ConfigError("missing latent scale for output pair (" + std::to_string(pair.first) + ", " +
                      std::to_string(pair.second) + ")");
  }
  return it->second;
}

void SeparableParams::validate() const {
  if (!(std::abs(t_ij) < 1.0)) throw ArgumentError("separable correlation must satisfy |t_ij| < 1");
  base_kernel.validate();
  if (!(noise[0] > 0.0) || !(noise[1] > 0.0)) throw ArgumentError("noise must be positive");
}

ProductTerm::ProductTerm(const KernelSpec& a, const KernelSpec& b, double scale)
    : scale_(scale), shape_(0.0), weight_(0.0), phi_(a.dim()) {
  check_dims(a.dim(), b.dim(), "kernel pair");
  const Index dim = a.dim();
  double w = std::pow(2.0, 0.5 * static_cast<double>(dim));
  for (Index c = 0; c < dim; ++c) {
    const double la = a.lengthscale_diag[c];
    const double lb = b.lengthscale_diag[c];
    const double sum = la + lb;
    w *= std::sqrt(std::sqrt(la * lb)) / std::sqrt(sum);
    phi_[c] = la * lb / sum;
  }
  shape_ = w;
  weight_ = a.amplitude * b.amplitude * w;
}

double ProductTerm::operator()(const double* d) const {
  double q = 0.0;
  for (Index c = 0; c < phi_.size(); ++c) q += phi_[c] * d[c] * d[c];
  return scale_ * scale_ * weight_ * std::exp(-0.5 * q);
}

double ProductTerm::decay(const Matrix& X, Index r, const Matrix& Y, Index s) const {
  double q = 0.0;
  for (Index c = 0; c < phi_.size(); ++c) {
    const double d = X(r, c) - Y(s, c);
    q += phi_[c] * d * d;
  }
  return std::exp(-0.5 * q);
}

double ProductTerm::at(const Matrix& X, Index r, const Matrix& Y, Index s) const {
  return scale_ * scale_ * weight_ * decay(X, r, Y, s);
}

double cross_cov_term(const KernelSpec& a, const KernelSpec& b, double scale, const Eigen::Ref<const Vector>& d) {
  check_dims(a.dim(), d.size(), "displacement");
  check_dims(b.dim(), d.size(), "displacement");
  const Vector dd = d;
  return ProductTerm(a, b, scale)(dd.data());
}

double marginal_cov(const BivariateParams& params, Side which, const Eigen::Ref<const Vector>& d) {
  const KernelSpec& shared = params.shared_kernel(which);
  const KernelSpec& unique = params.unique_kernel(which);
  return cross_cov_term(shared, shared, params.xi0, d) + cross_cov_term(unique, unique, params.unique_scale(which), d);
}

double cross_cov(const BivariateParams& params, const Eigen::Ref<const Vector>& d) {
  return cross_cov_term(params.k_0i, params.k_0j, params.xi0, d);
}

double output_cov(const BivariateParams& params, Side a, Side b, const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& xp) {
  check_dims(x.size(), xp.size(), "input pair");
  const Vector d = x - xp;
  if (a != b) return cross_cov(params, d);
  double value = marginal_cov(params, a, d);
  if (x == xp) {
    const double s = params.sigma(a);
    value += s * s;
  }
  return value;
}

Matrix assemble_bivariate_cov(const BivariateParams& params, const Matrix& X_i, const Matrix& X_j) {
  params.validate();
  const Index dim = params.dim();
  check_dims(dim, X_i.cols(), "X_i columns");
  check_dims(dim, X_j.cols(), "X_j columns");
  const Index pi = X_i.rows();
  const Index pj = X_j.rows();

  const ProductTerm shared_i(params.k_0i, params.k_0i, params.xi0);
  const ProductTerm unique_i(params.k_ii, params.k_ii, params.xi_i);
  const ProductTerm shared_j(params.k_0j, params.k_0j, params.xi0);
  const ProductTerm unique_j(params.k_jj, params.k_jj, params.xi_j);
  const ProductTerm cross(params.k_0i, params.k_0j, params.xi0);

  Matrix C(pi + pj, pi + pj);
  for (Index r = 0; r < pi; ++r) {
    for (Index s = 0; s <= r; ++s) {
      const double v = shared_i.at(X_i, r, X_i, s) + unique_i.at(X_i, r, X_i, s);
      C(r, s) = v;
      C(s, r) = v;
    }
    C(r, r) += params.sigma_i * params.sigma_i;
  }
  for (Index r = 0; r < pj; ++r) {
    for (Index s = 0; s <= r; ++s) {
      const double v = shared_j.at(X_j, r, X_j, s) + unique_j.at(X_j, r, X_j, s);
      C(pi + r, pi + s) = v;
      C(pi + s, pi + r) = v;
    }
    C(pi + r, pi + r) += params.sigma_j * params.sigma_j;
  }
  for (Index r = 0; r < pi; ++r) {
    for (Index s = 0; s < pj; ++s) {
      const double v = cross.at(X_i, r, X_j, s);
      C(r, pi + s) = v;
      C(pi + s, r) = v;
    }
  }
  for (Index k = 0; k < C.size(); ++k) require_finite(C.data()[k], "covariance entry");
  return C;
}

Matrix assemble_full_cov(const FullMgcpParams& params, const std::vector<Matrix>& X) {
  params.validate();
  const int n = params.num_outputs;
  if (static_cast<int>(X.size()) != n) throw ArgumentError("need one input matrix per output");
  const Index dim = params.pair_kernels.begin()->second.first.dim();
  std::vector<Index> offset(n + 1, 0);
  for (int a = 0; a < n; ++a) {
    check_dims(dim, X[a].cols(), "input columns");
    offset[a + 1] = offset[a] + X[a].rows();
  }

  Matrix C = Matrix::Zero(offset[n], offset[n]);
  for (int a = 0; a < n; ++a) {
    // Diagonal block: every latent touching output a.
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const OutputPair key = make_pair_key(a, b);
      const KernelSpec& k = params.kernel(key, a);
      const ProductTerm term(k, k, params.scale(key));
      for (Index r = 0; r < X[a].rows(); ++r) {
        for (Index s = 0; s <= r; ++s) {
          const double v = term.at(X[a], r, X[a], s);
          C(offset[a] + r, offset[a] + s) += v;
          if (s != r) C(offset[a] + s, offset[a] + r) += v;
        }
      }
    }
    for (Index r = 0; r < X[a].rows(); ++r) C(offset[a] + r, offset[a] + r) += params.noise[a] * params.noise[a];

    // Off-diagonal blocks: only the latent shared by (a, b).
    for (int b = a + 1; b < n; ++b) {
      const OutputPair key{a, b};
      const ProductTerm term(params.kernel(key, a), params.kernel(key, b), params.scale(key));
      for (Index r = 0; r < X[a].rows(); ++r) {
        for (Index s = 0; s < X[b].rows(); ++s) {
          const double v = term.at(X[a], r, X[b], s);
          C(offset[a] + r, offset[b] + s) = v;
          C(offset[b] + s, offset[a] + r) = v;
        }
      }
    }
  }
  for (Index k = 0; k < C.size(); ++k) require_finite(C.data()[k], "covariance entry");
  return C;
}

double separable_cov(const SeparableParams& params, Side a, Side b, const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& xp) {
  params.validate();
  check_dims(params.base_kernel.dim(), x.size(), "input");
  check_dims(params.base_kernel.dim(), xp.size(), "input");
  const Vector d = x - xp;
  const double base = ProductTerm(params.base_kernel, params.base_kernel, 1.0)(d.data());
  return a == b ? base : params.t_ij * base;
}

Matrix assemble_separable_cov(const SeparableParams& params, const Matrix& X_i, const Matrix& X_j) {
  params.validate();
  const Index dim = params.base_kernel.dim();
  check_dims(dim, X_i.cols(), "X_i columns");
  check_dims(dim, X_j.cols(), "X_j columns");
  const ProductTerm base(params.base_kernel, params.base_kernel, 1.0);
  const Index pi = X_i.rows();
  const Index pj = X_j.rows();
  Matrix C(pi + pj, pi + pj);
  for (Index r = 0; r < pi + pj; ++r) {
    const bool ri = r < pi;
    const Matrix& Xr = ri ? X_i : X_j;
    const Index rr = ri ? r : r - pi;
    for (Index s = 0; s <= r; ++s) {
      const bool si = s < pi;
      const Matrix& Xs = si ? X_i : X_j;
      const Index ss = si ? s : s - pi;
      double v = base.at(Xr, rr, Xs, ss);
      if (ri != si) v *= params.t_ij;
      C(r, s) = v;
      C(s, r) = v;
    }
    const double noise = ri ? params.noise[0] : params.noise[1];
    C(r, r) += noise * noise;
  }
  return C;
}

}  // namespace mgcp
