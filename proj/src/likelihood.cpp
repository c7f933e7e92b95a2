#include "mgcp/likelihood.hpp"

#include <cmath>
#include <string>

#include "mgcp/cholesky.hpp"
#include "mgcp/detail/term_gradient.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::Ridge: return "ridge";
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::Bridge: return "bridge";
    case PenaltyKind::Scad: return "scad";
  }
  return "none";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  if (name == "none") return PenaltyKind::None;
  if (name == "ridge") return PenaltyKind::Ridge;
  if (name == "l1") return PenaltyKind::L1;
  if (name == "bridge") return PenaltyKind::Bridge;
  if (name == "scad") return PenaltyKind::Scad;
  throw ArgumentError("unknown penalty '" + std::string(name) + "'");
}

void PenaltyConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("penalty lambda must be finite and >= 0");
  if (kind == PenaltyKind::Scad && !(gamma > 2.0)) throw ArgumentError("SCAD gamma must exceed 2");
  if (kind == PenaltyKind::Bridge && !(bridge_exponent > 0.0 && bridge_exponent < 1.0)) {
    throw ArgumentError("bridge exponent must lie in (0, 1)");
  }
}

bool PenaltyConfig::is_sparse() const {
  return lambda > 0.0 && (kind == PenaltyKind::L1 || kind == PenaltyKind::Bridge || kind == PenaltyKind::Scad);
}

namespace {

double scad_value(double a, double lambda, double gamma) {
  if (a <= lambda) return lambda * a;
  if (a <= gamma * lambda) return -(a * a - 2.0 * gamma * lambda * a + lambda * lambda) / (2.0 * (gamma - 1.0));
  return lambda * lambda * (gamma + 1.0) / 2.0;
}

double scad_slope(double a, double lambda, double gamma) {
  if (a <= lambda) return lambda;
  if (a <= gamma * lambda) return (gamma * lambda - a) / (gamma - 1.0);
  return 0.0;
}

}  // namespace

double penalty(const PenaltyConfig& cfg, double xi0) {
  cfg.validate();
  const double a = std::abs(xi0);
  switch (cfg.kind) {
    case PenaltyKind::None: return 0.0;
    case PenaltyKind::Ridge: return cfg.lambda * xi0 * xi0;
    case PenaltyKind::L1: return cfg.lambda * a;
    case PenaltyKind::Bridge: return a == 0.0 ? 0.0 : cfg.lambda * std::pow(a, cfg.bridge_exponent);
    case PenaltyKind::Scad: return scad_value(a, cfg.lambda, cfg.gamma);
  }
  return 0.0;
}

double penalty_weight(const PenaltyConfig& cfg, const OutputSeries& data_i, const OutputSeries& data_j) {
  if (!cfg.scale_by_points) return 1.0;
  return 0.5 * static_cast<double>(data_i.size() + data_j.size());
}

PenaltySlope smoothed_penalty(const PenaltyConfig& cfg, double xi0, double eps) {
  cfg.validate();
  if (cfg.kind == PenaltyKind::None || cfg.lambda == 0.0) return {};
  if (cfg.kind == PenaltyKind::Ridge) return {cfg.lambda * xi0 * xi0, 2.0 * cfg.lambda * xi0};
  const double s = std::sqrt(xi0 * xi0 + eps);
  const double ds = xi0 / s;
  switch (cfg.kind) {
    case PenaltyKind::L1: return {cfg.lambda * s, cfg.lambda * ds};
    case PenaltyKind::Bridge: {
      const double v = cfg.lambda * std::pow(s, cfg.bridge_exponent);
      return {v, cfg.bridge_exponent * v / s * ds};
    }
    case PenaltyKind::Scad: return {scad_value(s, cfg.lambda, cfg.gamma), scad_slope(s, cfg.lambda, cfg.gamma) * ds};
    default: return {};
  }
}

Index raw_gradient_size(Index dim) { return 9 + 4 * dim; }

Index raw_index(const ParamId& id, Index dim) {
  switch (id.kind) {
    case ParamId::Kind::Xi0: return 0;
    case ParamId::Kind::XiI: return 1;
    case ParamId::Kind::XiJ: return 2;
    case ParamId::Kind::Amplitude: return 3 + static_cast<Index>(id.slot);
    case ParamId::Kind::Lengthscale:
      if (id.dim < 0 || id.dim >= dim) throw ArgumentError("lengthscale dimension out of range");
      return 7 + static_cast<Index>(id.slot) * dim + id.dim;
    case ParamId::Kind::SigmaI: return 7 + 4 * dim;
    case ParamId::Kind::SigmaJ: return 8 + 4 * dim;
  }
  throw ArgumentError("unknown parameter id");
}

namespace {

struct BivariateTerms {
  explicit BivariateTerms(const BivariateParams& p)
      : shared_i(p.k_0i, p.k_0i, p.xi0),
        unique_i(p.k_ii, p.k_ii, p.xi_i),
        shared_j(p.k_0j, p.k_0j, p.xi0),
        unique_j(p.k_jj, p.k_jj, p.xi_j),
        cross(p.k_0i, p.k_0j, p.xi0) {}

  ProductTerm shared_i, unique_i, shared_j, unique_j, cross;
};

detail::TermSlots same_slots(Index scale, KernelSlot slot, Index dim) {
  const Index amp = raw_index(ParamId::amplitude(slot), dim);
  const Index len = raw_index(ParamId::lengthscale(slot, 0), dim);
  return {scale, amp, amp, len, len};
}

// g += coeff * d C(r, s) / d raw for one entry with r >= s in stacked (i then j) order.
void entry_raw_gradient(const BivariateParams& p, const BivariateTerms& t, const Matrix& Xi, const Matrix& Xj, Index r,
                        Index s, double coeff, double* g) {
  const Index pi = Xi.rows();
  const Index dim = p.dim();
  if (s < pi && r < pi) {
    detail::accumulate_term_gradient(t.shared_i, p.k_0i, p.k_0i, Xi, r, Xi, s, coeff,
                                     same_slots(0, KernelSlot::SharedI, dim), g);
    detail::accumulate_term_gradient(t.unique_i, p.k_ii, p.k_ii, Xi, r, Xi, s, coeff,
                                     same_slots(1, KernelSlot::UniqueI, dim), g);
    if (r == s) g[raw_index(ParamId::sigma(Side::I), dim)] += coeff * 2.0 * p.sigma_i;
  } else if (s >= pi) {
    detail::accumulate_term_gradient(t.shared_j, p.k_0j, p.k_0j, Xj, r - pi, Xj, s - pi, coeff,
                                     same_slots(0, KernelSlot::SharedJ, dim), g);
    detail::accumulate_term_gradient(t.unique_j, p.k_jj, p.k_jj, Xj, r - pi, Xj, s - pi, coeff,
                                     same_slots(2, KernelSlot::UniqueJ, dim), g);
    if (r == s) g[raw_index(ParamId::sigma(Side::J), dim)] += coeff * 2.0 * p.sigma_j;
  } else {
    const detail::TermSlots slots{0, raw_index(ParamId::amplitude(KernelSlot::SharedI), dim),
                                  raw_index(ParamId::amplitude(KernelSlot::SharedJ), dim),
                                  raw_index(ParamId::lengthscale(KernelSlot::SharedI, 0), dim),
                                  raw_index(ParamId::lengthscale(KernelSlot::SharedJ, 0), dim)};
    detail::accumulate_term_gradient(t.cross, p.k_0i, p.k_0j, Xi, s, Xj, r - pi, coeff, slots, g);
  }
}

Vector stacked_response(const OutputSeries& a, const OutputSeries& b) {
  Vector y(a.size() + b.size());
  y << a.y, b.y;
  return y;
}

void check_data(const BivariateParams& params, const OutputSeries& di, const OutputSeries& dj) {
  if (di.size() < 1 || dj.size() < 1) throw ArgumentError("each output needs at least one observation");
  if (di.X.rows() != di.y.size() || dj.X.rows() != dj.y.size()) throw ArgumentError("rows(X) must equal |y|");
  if (di.X.cols() != params.dim() || dj.X.cols() != params.dim()) {
    throw ArgumentError("input dimension does not match kernel dimension");
  }
}

// nll value and raw gradient from one factorization.
double nll_and_raw_grad(const BivariateParams& params, const OutputSeries& di, const OutputSeries& dj,
                        Vector* raw) {
  check_data(params, di, dj);
  const Matrix C = assemble_bivariate_cov(params, di.X, dj.X);
  const Factorization f = factorize(C);
  const Vector y = stacked_response(di, dj);
  const double value = gaussian_nll(f, y);
  if (!std::isfinite(value)) throw NumericalError("non-finite negative log-likelihood");
  if (raw != nullptr) {
    const Index dim = params.dim();
    raw->setZero(raw_gradient_size(dim));
    const Matrix W = nll_weight_matrix(f, y);
    const BivariateTerms terms(params);
    const Index n = C.rows();
    for (Index r = 0; r < n; ++r) {
      for (Index s = 0; s <= r; ++s) {
        const double coeff = -0.5 * W(r, s) * (r == s ? 1.0 : 2.0);
        entry_raw_gradient(params, terms, di.X, dj.X, r, s, coeff, raw->data());
      }
    }
  }
  return value;
}

}  // namespace

Matrix cov_param_derivative(const BivariateParams& params, const ParamId& which, const Matrix& X_i,
                            const Matrix& X_j) {
  params.validate();
  const Index dim = params.dim();
  if (X_i.cols() != dim || X_j.cols() != dim) throw ArgumentError("input dimension does not match kernel dimension");
  const Index idx = raw_index(which, dim);
  const BivariateTerms terms(params);
  const Index n = X_i.rows() + X_j.rows();
  Matrix dC(n, n);
  Vector g(raw_gradient_size(dim));
  for (Index r = 0; r < n; ++r) {
    for (Index s = 0; s <= r; ++s) {
      g.setZero();
      entry_raw_gradient(params, terms, X_i, X_j, r, s, 1.0, g.data());
      dC(r, s) = g[idx];
      dC(s, r) = g[idx];
    }
  }
  return dC;
}

ParamLayout::ParamLayout(Index dim, LayoutOptions options) : dim_(dim), options_(options) {
  if (dim < 1) throw ArgumentError("layout needs at least one input dimension");
  const bool tied = options_.tie_shared_kernels;
  const bool balanced = options_.balance_shared_amplitudes;
  if (balanced && !tied) names_.push_back("shared_amplitude_log_ratio");
  if (!balanced && tied) names_.push_back("log_amplitude_0");
  if (!balanced && !tied) {
    names_.push_back("log_amplitude_0i");
    names_.push_back("log_amplitude_0j");
  }
  const auto add_lengths = [&](const std::string& kernel) {
    for (Index c = 0; c < dim; ++c) names_.push_back("log_lengthscale_" + kernel + "[" + std::to_string(c) + "]");
  };
  if (tied) {
    add_lengths("0");
  } else {
    add_lengths("0i");
    add_lengths("0j");
  }
  names_.push_back("log_amplitude_ii");
  add_lengths("ii");
  names_.push_back("log_amplitude_jj");
  add_lengths("jj");
  if (options_.free_unique_scales) {
    names_.push_back("xi_i");
    names_.push_back("xi_j");
  }
  names_.push_back("log_sigma_i");
  names_.push_back("log_sigma_j");
  names_.push_back("xi0");
}

Vector ParamLayout::pack(const BivariateParams& params) const {
  params.validate();
  if (params.dim() != dim_) throw ArgumentError("parameter dimension does not match layout");
  const bool tied = options_.tie_shared_kernels;
  const bool balanced = options_.balance_shared_amplitudes;

  double a0i = params.k_0i.amplitude;
  double a0j = tied ? params.k_0i.amplitude : params.k_0j.amplitude;
  if (!(a0i * a0j > 0.0)) throw ArgumentError("shared amplitudes must be nonzero with a positive product");
  a0i = std::abs(a0i);
  a0j = std::abs(a0j);
  double xi0 = params.xi0;
  if (balanced) {
    const double g = std::sqrt(a0i * a0j);
    xi0 *= g;
    a0i /= g;
    a0j /= g;
  }

  Vector v(size());
  Index k = 0;
  if (balanced && !tied) v[k++] = std::log(a0i);
  if (!balanced && tied) v[k++] = std::log(a0i);
  if (!balanced && !tied) {
    v[k++] = std::log(a0i);
    v[k++] = std::log(a0j);
  }
  for (Index c = 0; c < dim_; ++c) v[k++] = std::log(params.k_0i.lengthscale_diag[c]);
  if (!tied) {
    for (Index c = 0; c < dim_; ++c) v[k++] = std::log(params.k_0j.lengthscale_diag[c]);
  }
  const auto pack_unique = [&](const KernelSpec& kernel, double scale) {
    const double amp = options_.free_unique_scales ? kernel.amplitude : kernel.amplitude * scale;
    if (amp == 0.0) throw ArgumentError("unique amplitude must be nonzero");
    v[k++] = std::log(std::abs(amp));
    for (Index c = 0; c < dim_; ++c) v[k++] = std::log(kernel.lengthscale_diag[c]);
  };
  pack_unique(params.k_ii, params.xi_i);
  pack_unique(params.k_jj, params.xi_j);
  if (options_.free_unique_scales) {
    v[k++] = params.xi_i;
    v[k++] = params.xi_j;
  }
  v[k++] = std::log(params.sigma_i);
  v[k++] = std::log(params.sigma_j);
  v[k++] = xi0;
  return v;
}

BivariateParams ParamLayout::unpack(const Eigen::Ref<const Vector>& coords) const {
  if (coords.size() != size()) throw ArgumentError("coordinate vector has wrong length");
  const bool tied = options_.tie_shared_kernels;
  const bool balanced = options_.balance_shared_amplitudes;
  BivariateParams p;
  Index k = 0;
  double a0i = 1.0;
  double a0j = 1.0;
  if (balanced && !tied) {
    a0i = std::exp(coords[k]);
    a0j = std::exp(-coords[k]);
    ++k;
  } else if (!balanced && tied) {
    a0i = a0j = std::exp(coords[k++]);
  } else if (!balanced && !tied) {
    a0i = std::exp(coords[k++]);
    a0j = std::exp(coords[k++]);
  }
  const auto read_lengths = [&]() {
    Vector l(dim_);
    for (Index c = 0; c < dim_; ++c) l[c] = std::exp(coords[k++]);
    return l;
  };
  p.k_0i = KernelSpec{a0i, read_lengths()};
  p.k_0j = tied ? KernelSpec{a0j, p.k_0i.lengthscale_diag} : KernelSpec{a0j, read_lengths()};
  const double aii = std::exp(coords[k++]);
  p.k_ii = KernelSpec{aii, read_lengths()};
  const double ajj = std::exp(coords[k++]);
  p.k_jj = KernelSpec{ajj, read_lengths()};
  if (options_.free_unique_scales) {
    p.xi_i = coords[k++];
    p.xi_j = coords[k++];
  } else {
    p.xi_i = 1.0;
    p.xi_j = 1.0;
  }
  p.sigma_i = std::exp(coords[k++]);
  p.sigma_j = std::exp(coords[k++]);
  p.xi0 = coords[k++];
  return p;
}

Vector ParamLayout::chain(const BivariateParams& p, const Vector& raw) const {
  if (raw.size() != raw_gradient_size(dim_)) throw ArgumentError("raw gradient has wrong length");
  const bool tied = options_.tie_shared_kernels;
  const bool balanced = options_.balance_shared_amplitudes;
  const auto amp = [&](KernelSlot s) { return raw[raw_index(ParamId::amplitude(s), dim_)]; };
  const auto len = [&](KernelSlot s, Index c) { return raw[raw_index(ParamId::lengthscale(s, c), dim_)]; };

  Vector g(size());
  Index k = 0;
  const double a0i = p.k_0i.amplitude;
  const double a0j = p.k_0j.amplitude;
  if (balanced && !tied) g[k++] = a0i * amp(KernelSlot::SharedI) - a0j * amp(KernelSlot::SharedJ);
  if (!balanced && tied) g[k++] = a0i * (amp(KernelSlot::SharedI) + amp(KernelSlot::SharedJ));
  if (!balanced && !tied) {
    g[k++] = a0i * amp(KernelSlot::SharedI);
    g[k++] = a0j * amp(KernelSlot::SharedJ);
  }
  for (Index c = 0; c < dim_; ++c) {
    const double l = p.k_0i.lengthscale_diag[c];
    g[k++] = tied ? l * (len(KernelSlot::SharedI, c) + len(KernelSlot::SharedJ, c)) : l * len(KernelSlot::SharedI, c);
  }
  if (!tied) {
    for (Index c = 0; c < dim_; ++c) g[k++] = p.k_0j.lengthscale_diag[c] * len(KernelSlot::SharedJ, c);
  }
  g[k++] = p.k_ii.amplitude * amp(KernelSlot::UniqueI);
  for (Index c = 0; c < dim_; ++c) g[k++] = p.k_ii.lengthscale_diag[c] * len(KernelSlot::UniqueI, c);
  g[k++] = p.k_jj.amplitude * amp(KernelSlot::UniqueJ);
  for (Index c = 0; c < dim_; ++c) g[k++] = p.k_jj.lengthscale_diag[c] * len(KernelSlot::UniqueJ, c);
  if (options_.free_unique_scales) {
    g[k++] = raw[raw_index(ParamId::xi(Side::I), dim_)];
    g[k++] = raw[raw_index(ParamId::xi(Side::J), dim_)];
  }
  g[k++] = p.sigma_i * raw[raw_index(ParamId::sigma(Side::I), dim_)];
  g[k++] = p.sigma_j * raw[raw_index(ParamId::sigma(Side::J), dim_)];
  g[k++] = raw[raw_index(ParamId::xi0(), dim_)];
  return g;
}

double nll(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j) {
  return nll_and_raw_grad(params, data_i, data_j, nullptr);
}

Vector nll_raw_grad(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j) {
  Vector raw;
  nll_and_raw_grad(params, data_i, data_j, &raw);
  return raw;
}

Vector nll_grad(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j,
                const ParamLayout& layout) {
  return layout.chain(params, nll_raw_grad(params, data_i, data_j));
}

double penalized_nll(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j,
                     const PenaltyConfig& cfg) {
  return nll(params, data_i, data_j) + penalty_weight(cfg, data_i, data_j) * penalty(cfg, params.xi0);
}

Vector penalized_grad(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j,
                      const PenaltyConfig& cfg, const ParamLayout& layout) {
  Vector g = nll_grad(params, data_i, data_j, layout);
  g[layout.xi0_index()] += penalty_weight(cfg, data_i, data_j) * smoothed_penalty(cfg, params.xi0).derivative;
  return g;
}

BivariateObjective::BivariateObjective(const OutputSeries& data_i, const OutputSeries& data_j, PenaltyConfig cfg,
                                       ParamLayout layout)
    : data_i_(data_i), data_j_(data_j), cfg_(cfg), layout_(std::move(layout)) {
  cfg_.validate();
  if (data_i.X.cols() != layout_.dim() || data_j.X.cols() != layout_.dim()) {
    throw ArgumentError("input dimension does not match layout");
  }
}

double BivariateObjective::operator()(const Vector& coords, Vector* grad) const {
  const BivariateParams params = layout_.unpack(coords);
  const PenaltySlope pen = smoothed_penalty(cfg_, params.xi0);
  const double w = penalty_weight(cfg_, data_i_, data_j_);
  if (grad == nullptr) return nll_and_raw_grad(params, data_i_, data_j_, nullptr) + w * pen.value;
  Vector raw;
  const double value = nll_and_raw_grad(params, data_i_, data_j_, &raw) + w * pen.value;
  *grad = layout_.chain(params, raw);
  (*grad)[layout_.xi0_index()] += w * pen.derivative;
  return value;
}

}  // namespace mgcp
