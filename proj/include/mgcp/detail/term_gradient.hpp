#pragma once

#include "mgcp/covariance.hpp"

namespace mgcp::detail {

// Positions of one ProductTerm's parameters inside a raw gradient buffer.
// `len_a` / `len_b` index the first of D consecutive lengthscale entries.
// A negative `scale` means the latent scale is held fixed.
struct TermSlots {
  Index scale = -1;
  Index amp_a = 0;
  Index amp_b = 0;
  Index len_a = 0;
  Index len_b = 0;
};

// grad += coeff * d term(X.row(r) - Y.row(s)) / d raw, for raw = (scale, amplitudes, Lambda diagonals).
// When both kernels are the same object the slots coincide and the two contributions add up.
inline void accumulate_term_gradient(const ProductTerm& term, const KernelSpec& a, const KernelSpec& b, const Matrix& X,
                                     Index r, const Matrix& Y, Index s, double coeff, const TermSlots& slots,
                                     double* grad) {
  const double decay = term.decay(X, r, Y, s);
  const double sc = term.scale();
  const double base = term.shape() * decay;
  const double value = sc * sc * a.amplitude * b.amplitude * base;
  if (slots.scale >= 0) grad[slots.scale] += coeff * 2.0 * sc * a.amplitude * b.amplitude * base;
  grad[slots.amp_a] += coeff * sc * sc * b.amplitude * base;
  grad[slots.amp_b] += coeff * sc * sc * a.amplitude * base;
  if (value == 0.0) return;
  for (Index c = 0; c < term.dim(); ++c) {
    const double d = X(r, c) - Y(s, c);
    const double la = a.lengthscale_diag[c];
    const double lb = b.lengthscale_diag[c];
    const double sum = la + lb;
    const double inv_sum = 1.0 / sum;
    const double d2 = d * d * inv_sum * inv_sum;
    grad[slots.len_a + c] += coeff * value * (0.25 / la - 0.5 * inv_sum - 0.5 * d2 * lb * lb);
    grad[slots.len_b + c] += coeff * value * (0.25 / lb - 0.5 * inv_sum - 0.5 * d2 * la * la);
  }
}

}  // namespace mgcp::detail
