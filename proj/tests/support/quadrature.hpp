#pragma once

// Direct numerical integration of scale^2 * \int K_a(u) K_b(u - d) du for D <= 2.
// Independent of the closed form: the kernels are evaluated as normal densities
// and integrated with the trapezoid rule, which converges geometrically for
// smooth, rapidly decaying integrands.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mgcp/covariance.hpp"

namespace mgcp::testing {

// K(x) = amplitude * (4 pi)^{D/4} |Lambda|^{-1/4} N(x | 0, Lambda^{-1}), diagonal Lambda.
inline double smoothing_kernel(const KernelSpec& k, const double* x) {
  const Index D = k.dim();
  double log_v = 0.0;
  for (Index c = 0; c < D; ++c) {
    const double l = k.lengthscale_diag[c];
    log_v += 0.25 * std::log(4.0 * std::numbers::pi) - 0.25 * std::log(l) + 0.5 * std::log(l / (2.0 * std::numbers::pi)) -
             0.5 * l * x[c] * x[c];
  }
  return k.amplitude * std::exp(log_v);
}

inline double quadrature_oracle(const KernelSpec& a, const KernelSpec& b, double scale, const Vector& d,
                                int nodes = 601) {
  const Index D = a.dim();
  if (D > 2) throw std::invalid_argument("quadrature oracle supports D <= 2");
  if (b.dim() != D || d.size() != D) throw std::invalid_argument("dimension mismatch");
  if (scale == 0.0) return 0.0;

  // The integrand is Gaussian in u along each axis, centered at l_b d / (l_a + l_b)
  // with std 1 / sqrt(l_a + l_b); integrate over +-12 std.
  double lo[2], h[2];
  for (Index c = 0; c < D; ++c) {
    const double la = a.lengthscale_diag[c];
    const double lb = b.lengthscale_diag[c];
    const double center = lb * d[c] / (la + lb);
    const double sd = 1.0 / std::sqrt(la + lb);
    lo[c] = center - 12.0 * sd;
    h[c] = 24.0 * sd / (nodes - 1);
  }

  const auto integrand = [&](const double* u) {
    double v[2];
    for (Index c = 0; c < D; ++c) v[c] = u[c] - d[c];
    return smoothing_kernel(a, u) * smoothing_kernel(b, v);
  };
  const auto weight = [nodes](int k) { return (k == 0 || k == nodes - 1) ? 0.5 : 1.0; };

  double sum = 0.0;
  double u[2];
  if (D == 1) {
    for (int k = 0; k < nodes; ++k) {
      u[0] = lo[0] + h[0] * k;
      sum += weight(k) * integrand(u);
    }
    sum *= h[0];
  } else {
    for (int k0 = 0; k0 < nodes; ++k0) {
      u[0] = lo[0] + h[0] * k0;
      for (int k1 = 0; k1 < nodes; ++k1) {
        u[1] = lo[1] + h[1] * k1;
        sum += weight(k0) * weight(k1) * integrand(u);
      }
    }
    sum *= h[0] * h[1];
  }
  return scale * scale * sum;
}

}  // namespace mgcp::testing
