#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "mgcp/data.hpp"
#include "mgcp/fit.hpp"
#include "mgcp/predict.hpp"

namespace mgcp {

/// Pairwise submodels to fit. Output references are 0-based positions in Dataset::outputs.
struct PairPlan {
  std::optional<int> target;  // empty: every pair
  std::vector<OutputPair> pairs;
};

// Lexicographic pairs; with a target, only the N-1 pairs containing it.
PairPlan enumerate_pairs(int num_outputs, std::optional<int> target = std::nullopt);

enum class CvCriterion { Mae, Mse };

// 0 followed by 10 log-spaced values on [1e-3, 10].
std::vector<double> default_lambda_grid();

struct CvConfig {
  int folds = 3;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::uint64_t seed = 0;
  CvCriterion criterion = CvCriterion::Mae;

  void validate() const;
};

struct CvResult {
  double lambda = 0.0;
  std::vector<double> scores;  // mean held-out error per grid value (+inf when every fold failed)
  int fits = 0;
};

/// Held-out grid search for the penalty weight of one pair.
///
/// Each output's points are shuffled with a seeded generator and dealt round-robin into
/// `folds` groups, so every fold keeps points of both outputs. Scores are held-out
/// errors of predictive means; with `focus` set, only that output's held-out points
/// count. Ties go to the smallest lambda. A single-value grid returns without fitting.
CvResult cross_validate_lambda(const Dataset& data, const OutputPair& pair, const CvConfig& cv,
                               const PenaltyConfig& penalty, const OptimizerConfig& opt,
                               std::optional<int> focus = std::nullopt, const LayoutOptions& layout = {});

struct PairFit {
  OutputPair pair;
  bool ok = false;
  std::string error;
  std::exception_ptr exception;
  FitResult fit;
  CvResult cv;
};

struct FitAllOptions {
  PenaltyConfig penalty;
  // When set and the penalty is not None, lambda is chosen per pair by cross-validation.
  std::optional<CvConfig> cv;
  OptimizerConfig optimizer;
  // Restart count used inside cross-validation fits; 0 keeps optimizer.restarts.
  int cv_restarts = 0;
  int parallelism = 1;
  LayoutOptions layout;
};

// Seed of the pair at `index` in a plan, derived from a base seed.
std::uint64_t pair_seed(std::uint64_t base, std::size_t index);

/// Fits every pair of the plan on up to `parallelism` threads.
///
/// Results follow plan order and do not depend on the thread count. A failing pair is
/// recorded in its PairFit; if every pair fails, the first failure is rethrown.
std::vector<PairFit> fit_all(const Dataset& data, const PairPlan& plan, const FitAllOptions& options);

/// Weighted product of Gaussian experts: 1/V = sum w_c / V_c, M = V * sum w_c M_c / V_c.
/// Weights must be nonnegative and sum to 1.
GaussianPrediction combine_poe(const std::vector<GaussianPrediction>& experts, const std::vector<double>& weights);

/// PoE prediction of `target` from the successful fits that contain it, equally weighted.
/// Throws NumericalError when no such fit exists.
std::vector<GaussianPrediction> predict_target(const std::vector<PairFit>& fits, const Dataset& data, int target,
                                               const Matrix& X_test);

}  // namespace mgcp
