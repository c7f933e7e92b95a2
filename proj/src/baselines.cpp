#include "mgcp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgcp/cholesky.hpp"
#include "mgcp/detail/term_gradient.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

namespace {

double sample_variance(const Vector& y) {
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
}

Vector median_lengthscales(const std::vector<const Matrix*>& inputs, Index dim) {
  Vector l(dim);
  for (Index c = 0; c < dim; ++c) {
    std::vector<double> col;
    for (const Matrix* X : inputs) {
      for (Index r = 0; r < X->rows(); ++r) col.push_back((*X)(r, c));
    }
    std::vector<double> dists;
    for (std::size_t r = 0; r < col.size(); ++r) {
      for (std::size_t s = 0; s < r; ++s) dists.push_back(std::abs(col[r] - col[s]));
    }
    double m = 0.0;
    if (!dists.empty()) {
      const std::size_t mid = dists.size() / 2;
      std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
      m = dists[mid];
      if (dists.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid)));
      }
    }
    l[c] = m > 0.0 ? 1.0 / (m * m) : 1.0;
  }
  return l;
}

double require_variance(const OutputSeries& s) {
  const double v = sample_variance(s.y);
  if (!(v > 0.0)) throw DegenerateDataError("output " + std::to_string(s.id) + " has zero variance");
  return v;
}

}  // namespace

Vector pack_gcp(const UnivariateParams& params) {
  params.validate();
  if (params.terms.size() != 1 || params.terms.front().scale != 1.0) {
    throw ArgumentError("GCP parameters hold exactly one unit-scale term");
  }
  const KernelSpec& k = params.terms.front().kernel;
  Vector v(k.dim() + 2);
  v[0] = std::log(std::abs(k.amplitude));
  v.segment(1, k.dim()) = k.lengthscale_diag.array().log().matrix();
  v[k.dim() + 1] = std::log(params.sigma);
  return v;
}

UnivariateParams unpack_gcp(const Eigen::Ref<const Vector>& coords) {
  if (coords.size() < 3) throw ArgumentError("GCP coordinate vector too short");
  const Index dim = coords.size() - 2;
  UnivariateParams p;
  p.terms.push_back({KernelSpec{std::exp(coords[0]), coords.segment(1, dim).array().exp().matrix()}, 1.0});
  p.sigma = std::exp(coords[dim + 1]);
  return p;
}

double gcp_nll(const UnivariateParams& params, const OutputSeries& data) {
  const Factorization f = factorize(assemble_univariate_cov(params, data.X));
  return gaussian_nll(f, data.y);
}

namespace {

double gcp_nll_and_grad(const UnivariateParams& params, const OutputSeries& data, Vector* grad) {
  const Factorization f = factorize(assemble_univariate_cov(params, data.X));
  const double value = gaussian_nll(f, data.y);
  if (!std::isfinite(value)) throw NumericalError("non-finite negative log-likelihood");
  if (grad == nullptr) return value;
  if (params.terms.size() != 1 || params.terms.front().scale != 1.0) {
    throw ArgumentError("GCP gradient needs exactly one unit-scale term");
  }
  const KernelSpec& k = params.terms.front().kernel;
  const Index dim = k.dim();
  const ProductTerm term(k, k, 1.0);
  const Matrix W = nll_weight_matrix(f, data.y);
  Vector raw = Vector::Zero(dim + 2);
  const detail::TermSlots slots{-1, 0, 0, 1, 1};
  for (Index r = 0; r < data.X.rows(); ++r) {
    for (Index s = 0; s <= r; ++s) {
      const double coeff = -0.5 * W(r, s) * (r == s ? 1.0 : 2.0);
      detail::accumulate_term_gradient(term, k, k, data.X, r, data.X, s, coeff, slots, raw.data());
    }
    raw[dim + 1] += -0.5 * W(r, r) * 2.0 * params.sigma;
  }
  raw[0] *= k.amplitude;
  raw.segment(1, dim).array() *= k.lengthscale_diag.array();
  raw[dim + 1] *= params.sigma;
  *grad = raw;
  return value;
}

}  // namespace

Vector gcp_nll_grad(const UnivariateParams& params, const OutputSeries& data) {
  Vector g;
  gcp_nll_and_grad(params, data, &g);
  return g;
}

GcpFitResult fit_gcp(const OutputSeries& data, const OptimizerConfig& cfg) {
  cfg.validate();
  if (data.size() < 2) throw DegenerateDataError("GCP fit needs at least two observations");
  const double var = require_variance(data);

  UnivariateParams start;
  start.terms.push_back({KernelSpec{std::sqrt(0.99 * var), median_lengthscales({&data.X}, data.X.cols())}, 1.0});
  start.sigma = 0.1 * std::sqrt(var);

  const ObjectiveFn f = [&data](const Vector& x, Vector* g) { return gcp_nll_and_grad(unpack_gcp(x), data, g); };
  MinimizeResult run = minimize(f, pack_gcp(start), cfg);

  GcpFitResult out;
  out.params = unpack_gcp(run.x);
  out.objective = gcp_nll(out.params, data);
  out.converged = run.converged;
  out.trace = std::move(run.trace);
  return out;
}

Index full_param_count(int num_outputs, Index dim) {
  if (num_outputs < 2) throw ArgumentError("full MGCP needs at least two outputs");
  if (dim < 1) throw ArgumentError("input dimension must be >= 1");
  const Index n = num_outputs;
  return n * (n - 1) * (1 + dim) + n;
}

Vector pack_full(const FullMgcpParams& params) {
  params.validate();
  const int n = params.num_outputs;
  const Index dim = params.pair_kernels.begin()->second.first.dim();
  Vector v(full_param_count(n, dim));
  Index k = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const OutputPair key{a, b};
      if (params.scale(key) != 1.0) throw ArgumentError("full MGCP coordinates need unit latent scales");
      for (const KernelSpec* ks : {&params.kernel(key, a), &params.kernel(key, b)}) {
        v[k++] = std::log(std::abs(ks->amplitude));
        for (Index c = 0; c < dim; ++c) v[k++] = std::log(ks->lengthscale_diag[c]);
      }
    }
  }
  for (int a = 0; a < n; ++a) v[k++] = std::log(params.noise[a]);
  return v;
}

FullMgcpParams unpack_full(const Eigen::Ref<const Vector>& coords, int num_outputs, Index dim) {
  if (coords.size() != full_param_count(num_outputs, dim)) throw ArgumentError("full MGCP coordinate length mismatch");
  FullMgcpParams p;
  p.num_outputs = num_outputs;
  Index k = 0;
  const auto read_kernel = [&] {
    KernelSpec ks;
    ks.amplitude = std::exp(coords[k++]);
    ks.lengthscale_diag.resize(dim);
    for (Index c = 0; c < dim; ++c) ks.lengthscale_diag[c] = std::exp(coords[k++]);
    return ks;
  };
  for (int a = 0; a < num_outputs; ++a) {
    for (int b = a + 1; b < num_outputs; ++b) {
      KernelSpec ka = read_kernel();
      KernelSpec kb = read_kernel();
      p.pair_kernels[{a, b}] = {std::move(ka), std::move(kb)};
      p.latent_scales[{a, b}] = 1.0;
    }
  }
  p.noise.resize(num_outputs);
  for (int a = 0; a < num_outputs; ++a) p.noise[a] = std::exp(coords[k++]);
  return p;
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

// Offset of the kernel (pair, side) inside pack_full() coordinates.
Index kernel_offset(int num_outputs, Index dim, const OutputPair& pair, int output) {
  Index q = 0;
  for (int a = 0; a < num_outputs; ++a) {
    for (int b = a + 1; b < num_outputs; ++b, ++q) {
      if (a == pair.first && b == pair.second) return (2 * q + (output == a ? 0 : 1)) * (1 + dim);
    }
  }
  throw ArgumentError("pair not found");
}

double full_nll_and_grad(const FullMgcpParams& params, const Dataset& data, Vector* grad) {
  const int n = params.num_outputs;
  if (static_cast<int>(data.size()) != n) throw ArgumentError("dataset and parameters disagree on output count");
  const std::vector<Matrix> X = inputs_of(data);
  const Factorization f = factorize(assemble_full_cov(params, X));
  const Vector y = responses_of(data);
  const double value = gaussian_nll(f, y);
  if (!std::isfinite(value)) throw NumericalError("non-finite negative log-likelihood");
  if (grad == nullptr) return value;

  const Index dim = data.input_dim();
  const Matrix W = nll_weight_matrix(f, y);
  Vector raw = Vector::Zero(full_param_count(n, dim));
  const Index noise_begin = raw.size() - n;

  std::vector<Index> offset(static_cast<std::size_t>(n) + 1, 0);
  for (int a = 0; a < n; ++a) offset[a + 1] = offset[a] + X[a].rows();

  const auto slots_for = [&](const OutputPair& key, int a, int b) {
    const Index oa = kernel_offset(n, dim, key, a);
    const Index ob = kernel_offset(n, dim, key, b);
    return detail::TermSlots{-1, oa, ob, oa + 1, ob + 1};
  };

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b <= a; ++b) {
      const Matrix& Xa = X[a];
      const Matrix& Xb = X[b];
      // Block (a, b) with a >= b: lower triangle only on the diagonal blocks.
      std::vector<std::pair<OutputPair, int>> latents;  // (pair, partner output for kernel b)
      if (a == b) {
        for (int c = 0; c < n; ++c) {
          if (c != a) latents.emplace_back(make_pair_key(a, c), a);
        }
      } else {
        latents.emplace_back(make_pair_key(a, b), b);
      }
      for (const auto& [key, other] : latents) {
        const KernelSpec& ka = params.kernel(key, a);
        const KernelSpec& kb = params.kernel(key, other);
        const ProductTerm term(ka, kb, 1.0);
        const detail::TermSlots slots = slots_for(key, a, other);
        for (Index r = 0; r < Xa.rows(); ++r) {
          const Index s_end = a == b ? r + 1 : Xb.rows();
          for (Index s = 0; s < s_end; ++s) {
            const Index gr = offset[a] + r;
            const Index gs = offset[b] + s;
            const double coeff = -0.5 * W(gr, gs) * (gr == gs ? 1.0 : 2.0);
            detail::accumulate_term_gradient(term, ka, kb, Xa, r, Xb, s, coeff, slots, raw.data());
          }
        }
      }
      if (a == b) {
        for (Index r = 0; r < Xa.rows(); ++r) {
          raw[noise_begin + a] += -0.5 * W(offset[a] + r, offset[a] + r) * 2.0 * params.noise[a];
        }
      }
    }
  }

  // Log-coordinate chain rule.
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const OutputPair key{a, b};
      for (int side : {a, b}) {
        const KernelSpec& k = params.kernel(key, side);
        const Index o = kernel_offset(n, dim, key, side);
        raw[o] *= k.amplitude;
        for (Index c = 0; c < dim; ++c) raw[o + 1 + c] *= k.lengthscale_diag[c];
      }
    }
  }
  for (int a = 0; a < n; ++a) raw[noise_begin + a] *= params.noise[a];
  *grad = raw;
  return value;
}

}  // namespace

double full_nll(const FullMgcpParams& params, const Dataset& data) {
  return full_nll_and_grad(params, data, nullptr);
}

Vector full_nll_grad(const FullMgcpParams& params, const Dataset& data) {
  Vector g;
  full_nll_and_grad(params, data, &g);
  return g;
}

FullFitResult fit_full_mgcp(const Dataset& data, const OptimizerConfig& cfg) {
  cfg.validate();
  data.validate();
  const int n = static_cast<int>(data.size());
  if (n < 2) throw ArgumentError("full MGCP needs at least two outputs");
  Index total = 0;
  for (const OutputSeries& s : data.outputs) total += s.size();
  if (total > kFullMgcpMaxPoints) {
    throw SizeError("full MGCP limited to " + std::to_string(kFullMgcpMaxPoints) + " observations, got " +
                    std::to_string(total));
  }
  const Index dim = data.input_dim();

  std::vector<const Matrix*> inputs;
  for (const OutputSeries& s : data.outputs) inputs.push_back(&s.X);
  const Vector lengths = median_lengthscales(inputs, dim);

  FullMgcpParams start;
  start.num_outputs = n;
  start.noise.resize(n);
  std::vector<double> amp(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const double var = require_variance(data.outputs[static_cast<std::size_t>(a)]);
    // Each of the N-1 latents touching an output takes an equal share of its signal variance.
    amp[static_cast<std::size_t>(a)] = std::sqrt(0.99 * var / (n - 1));
    start.noise[a] = 0.1 * std::sqrt(var);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      start.pair_kernels[{a, b}] = {KernelSpec{amp[static_cast<std::size_t>(a)], lengths},
                                    KernelSpec{amp[static_cast<std::size_t>(b)], lengths}};
      start.latent_scales[{a, b}] = 1.0;
    }
  }

  const ObjectiveFn f = [&](const Vector& x, Vector* g) { return full_nll_and_grad(unpack_full(x, n, dim), data, g); };
  MinimizeResult run = minimize(f, pack_full(start), cfg);

  FullFitResult out;
  out.params = unpack_full(run.x, n, dim);
  out.objective = full_nll(out.params, data);
  out.converged = run.converged;
  out.trace = std::move(run.trace);
  out.param_count = full_param_count(n, dim);
  return out;
}

}  // namespace mgcp
