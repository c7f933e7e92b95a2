#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mgcp/covariance.hpp"
#include "mgcp/data.hpp"

namespace mgcp {

enum class PenaltyKind { None, Ridge, L1, Bridge, Scad };

std::string to_string(PenaltyKind kind);
// Accepts none|ridge|l1|bridge|scad; throws ArgumentError otherwise.
PenaltyKind parse_penalty_kind(std::string_view name);

/// Penalty on the shared-latent scale |xi0|.
struct PenaltyConfig {
  PenaltyKind kind = PenaltyKind::None;
  double lambda = 0.0;
  double gamma = 3.7;             // SCAD only, > 2
  double bridge_exponent = 0.5;   // bridge only, in (0, 1)
  // Multiply the penalty by the mean per-output point count, p * P(|xi0|).
  bool scale_by_points = false;

  void validate() const;
  // True for penalties whose minimizers may sit exactly at xi0 = 0.
  bool is_sparse() const;
};

// Smoothing constant for |xi0| ~ sqrt(xi0^2 + eps) inside gradients.
inline constexpr double kSmoothingEpsilon = 1e-8;
// Fitted |xi0| below this is set to exactly zero under sparse penalties.
inline constexpr double kSparsityThreshold = 1e-4;

double penalty(const PenaltyConfig& cfg, double xi0);

// Factor applied to the penalty for this pair: (p_i + p_j) / 2 with scale_by_points, else 1.
double penalty_weight(const PenaltyConfig& cfg, const OutputSeries& data_i, const OutputSeries& data_j);

struct PenaltySlope {
  double value = 0.0;
  double derivative = 0.0;
};

// Penalty evaluated at sqrt(xi0^2 + eps) and its derivative in xi0. Ridge is left unsmoothed.
PenaltySlope smoothed_penalty(const PenaltyConfig& cfg, double xi0, double eps = kSmoothingEpsilon);

/// Kernel slots of a bivariate submodel.
enum class KernelSlot { SharedI = 0, SharedJ = 1, UniqueI = 2, UniqueJ = 3 };

/// One raw (untransformed) parameter of BivariateParams.
struct ParamId {
  enum class Kind { Xi0, XiI, XiJ, Amplitude, Lengthscale, SigmaI, SigmaJ };
  Kind kind = Kind::Xi0;
  KernelSlot slot = KernelSlot::SharedI;
  Index dim = 0;

  static ParamId xi0() { return {Kind::Xi0}; }
  static ParamId xi(Side s) { return {s == Side::I ? Kind::XiI : Kind::XiJ}; }
  static ParamId sigma(Side s) { return {s == Side::I ? Kind::SigmaI : Kind::SigmaJ}; }
  static ParamId amplitude(KernelSlot slot) { return {Kind::Amplitude, slot}; }
  static ParamId lengthscale(KernelSlot slot, Index dim) { return {Kind::Lengthscale, slot, dim}; }
};

/// d C / d theta for one raw parameter, same shape as assemble_bivariate_cov(). Lengthscale
/// derivatives are taken with respect to the Lambda diagonal entry.
Matrix cov_param_derivative(const BivariateParams& params, const ParamId& which, const Matrix& X_i,
                            const Matrix& X_j);

struct LayoutOptions {
  // K_0i == K_0j (one shared kernel).
  bool tie_shared_kernels = false;
  // Optimize xi_i, xi_j instead of holding them at 1.
  bool free_unique_scales = false;
  // Hold a_0i * a_0j = 1 so that xi0 alone sets the shared-latent magnitude.
  bool balance_shared_amplitudes = true;
};

/// Optimizer coordinates of a bivariate submodel.
///
/// Order: shared amplitudes (log a_0i, log a_0j; or the single log-ratio a with
/// a_0i = e^a, a_0j = e^-a when balanced; nothing when balanced and tied), shared
/// Lambda diagonals in log space (D or 2D), log a_ii, log Lambda_ii, log a_jj,
/// log Lambda_jj, optional raw xi_i and xi_j, log sigma_i, log sigma_j, and raw xi0 last.
class ParamLayout {
 public:
  explicit ParamLayout(Index dim, LayoutOptions options = {});

  Index size() const { return static_cast<Index>(names_.size()); }
  Index dim() const { return dim_; }
  Index xi0_index() const { return size() - 1; }
  const LayoutOptions& options() const { return options_; }
  const std::vector<std::string>& names() const { return names_; }

  // Balanced layouts fold sqrt(a_0i a_0j) into xi0, which leaves the covariance unchanged.
  Vector pack(const BivariateParams& params) const;
  BivariateParams unpack(const Eigen::Ref<const Vector>& coords) const;
  // Maps a gradient over raw parameters (see raw_gradient_size()) to these coordinates.
  Vector chain(const BivariateParams& params, const Vector& raw_gradient) const;

 private:
  Index dim_;
  LayoutOptions options_;
  std::vector<std::string> names_;
};

// Raw parameter buffer: xi0, xi_i, xi_j, four amplitudes (slot order), 4*D Lambda entries, sigma_i, sigma_j.
Index raw_gradient_size(Index dim);
Index raw_index(const ParamId& id, Index dim);

double nll(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j);

// Gradient of nll over all raw parameters (layout-independent).
Vector nll_raw_grad(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j);

Vector nll_grad(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j,
                const ParamLayout& layout);

double penalized_nll(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j,
                     const PenaltyConfig& cfg);

Vector penalized_grad(const BivariateParams& params, const OutputSeries& data_i, const OutputSeries& data_j,
                      const PenaltyConfig& cfg, const ParamLayout& layout);

/// Smoothed penalized objective over layout coordinates, the function the optimizer sees.
class BivariateObjective {
 public:
  BivariateObjective(const OutputSeries& data_i, const OutputSeries& data_j, PenaltyConfig cfg, ParamLayout layout);

  // Value at coords; writes the gradient when `grad` is non-null. Throws NumericalError on failure.
  double operator()(const Vector& coords, Vector* grad) const;

  const ParamLayout& layout() const { return layout_; }

 private:
  const OutputSeries& data_i_;
  const OutputSeries& data_j_;
  PenaltyConfig cfg_;
  ParamLayout layout_;
};

}  // namespace mgcp
