#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mgcp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Scaled Gaussian smoothing kernel K(x) = amplitude * (4 pi)^{D/4} |Lambda|^{-1/4} N(x | 0, Lambda^{-1}).
///
/// `lengthscale_diag` holds the diagonal of Lambda (one positive entry per input
/// dimension, units 1/input^2). Larger entries mean a narrower kernel.
struct KernelSpec {
  double amplitude = 1.0;
  Vector lengthscale_diag;

  Index dim() const { return lengthscale_diag.size(); }
  void validate() const;

  static KernelSpec isotropic(double amplitude, double lengthscale, Index dim);
};

/// Which output of a bivariate submodel.
enum class Side { I, J };

inline Side other(Side s) { return s == Side::I ? Side::J : Side::I; }

/// Parameters of one pairwise submodel: shared latent X_0 smoothed by K_0i / K_0j,
/// unique latents X_i / X_j smoothed by K_ii / K_jj, and per-output noise.
struct BivariateParams {
  KernelSpec k_0i, k_0j, k_ii, k_jj;
  double xi0 = 0.5;
  double xi_i = 1.0;
  double xi_j = 1.0;
  double sigma_i = 0.1;
  double sigma_j = 0.1;

  Index dim() const { return k_0i.dim(); }
  void validate() const;

  const KernelSpec& shared_kernel(Side s) const { return s == Side::I ? k_0i : k_0j; }
  const KernelSpec& unique_kernel(Side s) const { return s == Side::I ? k_ii : k_jj; }
  double unique_scale(Side s) const { return s == Side::I ? xi_i : xi_j; }
  double sigma(Side s) const { return s == Side::I ? sigma_i : sigma_j; }
};

/// Unordered output pair stored as (low, high), 0-based.
using OutputPair = std::pair<int, int>;

inline OutputPair make_pair_key(int a, int b) { return a < b ? OutputPair{a, b} : OutputPair{b, a}; }

/// Full MGCP with one latent per unordered pair of outputs and no unique latents.
/// `pair_kernels[{a,b}]` is (K_{q,a}, K_{q,b}) for the latent q shared by a < b.
struct FullMgcpParams {
  int num_outputs = 0;
  std::map<OutputPair, std::pair<KernelSpec, KernelSpec>> pair_kernels;
  std::map<OutputPair, double> latent_scales;
  Vector noise;

  void validate() const;
  // Kernel smoothing latent `pair` into output `output` (which must belong to the pair).
  const KernelSpec& kernel(const OutputPair& pair, int output) const;
  double scale(const OutputPair& pair) const;
};

/// Separable bivariate covariance T_ab * k(x, x') with unit-diagonal T.
struct SeparableParams {
  double t_ij = 0.0;
  KernelSpec base_kernel;
  std::array<double, 2> noise{0.1, 0.1};

  void validate() const;
};

/// Closed form of scale^2 * \int K_a(u) K_b(u - d) du for diagonal Lambda.
///
/// Evaluates scale^2 * w * exp(-1/2 sum_c phi_c d_c^2) with
/// w = 2^{D/2} a_a a_b prod_c (l_a l_b)^{1/4} / (l_a + l_b)^{1/2} and
/// phi_c = l_a l_b / (l_a + l_b).
class ProductTerm {
 public:
  ProductTerm(const KernelSpec& a, const KernelSpec& b, double scale);

  // Value at displacement d.
  double operator()(const double* d) const;
  // Value at d = X.row(r) - Y.row(s).
  double at(const Matrix& X, Index r, const Matrix& Y, Index s) const;
  // exp(-1/2 d' Phi^{-1} d) at d = X.row(r) - Y.row(s).
  double decay(const Matrix& X, Index r, const Matrix& Y, Index s) const;

  double scale() const { return scale_; }
  // w without the scale^2 factor.
  double weight() const { return weight_; }
  // w without the amplitudes: 2^{D/2} prod_c (l_a l_b)^{1/4} / (l_a + l_b)^{1/2}.
  double shape() const { return shape_; }
  const Vector& phi() const { return phi_; }
  Index dim() const { return phi_.size(); }

 private:
  double scale_;
  double shape_;
  double weight_;
  Vector phi_;
};

double cross_cov_term(const KernelSpec& a, const KernelSpec& b, double scale,
                      const Eigen::Ref<const Vector>& d);

// Noise-free auto-covariance of output `which`: shared plus unique latent contributions.
double marginal_cov(const BivariateParams& params, Side which, const Eigen::Ref<const Vector>& d);

// Noise-free cross-covariance between the two outputs; carried by the shared latent only.
double cross_cov(const BivariateParams& params, const Eigen::Ref<const Vector>& d);

// Covariance of noisy observations y_a(x), y_b(x'); noise enters iff a == b and x == x'.
double output_cov(const BivariateParams& params, Side a, Side b, const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& xp);

/// [[C_ii + s_i^2 I, C_ij], [C_ij', C_jj + s_j^2 I]] over the rows of X_i and X_j.
Matrix assemble_bivariate_cov(const BivariateParams& params, const Matrix& X_i, const Matrix& X_j);

/// Joint covariance of all outputs (outputs stacked in order, noise on the diagonal).
Matrix assemble_full_cov(const FullMgcpParams& params, const std::vector<Matrix>& X);

double separable_cov(const SeparableParams& params, Side a, Side b, const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& xp);

Matrix assemble_separable_cov(const SeparableParams& params, const Matrix& X_i, const Matrix& X_j);

}  // namespace mgcp
