#include "mgcp/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "mgcp/errors.hpp"

namespace mgcp {

PairPlan enumerate_pairs(int num_outputs, std::optional<int> target) {
  if (num_outputs < 2) throw ArgumentError("need at least two outputs to form pairs");
  if (target && (*target < 0 || *target >= num_outputs)) throw ArgumentError("target output out of range");
  PairPlan plan;
  plan.target = target;
  for (int a = 0; a < num_outputs; ++a) {
    for (int b = a + 1; b < num_outputs; ++b) {
      if (!target || a == *target || b == *target) plan.pairs.emplace_back(a, b);
    }
  }
  return plan;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid{0.0};
  for (int k = 0; k < 10; ++k) grid.push_back(std::pow(10.0, -3.0 + 4.0 * k / 9.0));
  return grid;
}

void CvConfig::validate() const {
  if (folds < 2) throw ArgumentError("cross-validation needs at least two folds");
  if (lambda_grid.empty()) throw ArgumentError("lambda grid is empty");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] >= 0.0) || !std::isfinite(lambda_grid[k])) {
      throw ArgumentError("lambda grid values must be finite and >= 0");
    }
    if (k > 0 && !(lambda_grid[k] > lambda_grid[k - 1])) throw ArgumentError("lambda grid must be strictly increasing");
  }
}

std::uint64_t pair_seed(std::uint64_t base, std::size_t index) {
  // splitmix64 finalizer over (base, index).
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

OutputSeries subset(const OutputSeries& s, const std::vector<Index>& rows) {
  OutputSeries out;
  out.id = s.id;
  out.X.resize(static_cast<Index>(rows.size()), s.X.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.X.row(static_cast<Index>(k)) = s.X.row(rows[k]);
    out.y[static_cast<Index>(k)] = s.y[rows[k]];
  }
  return out;
}

// fold[r] for each point of `s`.
std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < order.size(); ++k) fold[static_cast<std::size_t>(order[k])] = static_cast<int>(k) % folds;
  return fold;
}

struct FoldSplit {
  OutputSeries train_i, train_j, test_i, test_j;
};

FoldSplit split_fold(const OutputSeries& a, const OutputSeries& b, const std::vector<int>& fa,
                     const std::vector<int>& fb, int k) {
  std::vector<Index> tr_a, te_a, tr_b, te_b;
  for (Index r = 0; r < a.size(); ++r) (fa[static_cast<std::size_t>(r)] == k ? te_a : tr_a).push_back(r);
  for (Index r = 0; r < b.size(); ++r) (fb[static_cast<std::size_t>(r)] == k ? te_b : tr_b).push_back(r);
  return {subset(a, tr_a), subset(b, tr_b), subset(a, te_a), subset(b, te_b)};
}

}  // namespace

CvResult cross_validate_lambda(const Dataset& data, const OutputPair& pair, const CvConfig& cv,
                               const PenaltyConfig& penalty, const OptimizerConfig& opt, std::optional<int> focus,
                               const LayoutOptions& layout) {
  cv.validate();
  const int n = static_cast<int>(data.size());
  if (pair.first < 0 || pair.second >= n || pair.first >= pair.second) throw ArgumentError("invalid output pair");
  if (focus && *focus != pair.first && *focus != pair.second) throw ArgumentError("focus output is not in the pair");

  CvResult result;
  if (cv.lambda_grid.size() == 1) {
    result.lambda = cv.lambda_grid.front();
    return result;
  }

  const OutputSeries& a = data.outputs[static_cast<std::size_t>(pair.first)];
  const OutputSeries& b = data.outputs[static_cast<std::size_t>(pair.second)];
  if (a.size() < cv.folds || b.size() < cv.folds) {
    throw DegenerateDataError("cross-validation needs at least `folds` observations per output");
  }
  const std::uint64_t base = pair_seed(cv.seed, static_cast<std::size_t>(pair.first) * 1000003u +
                                                    static_cast<std::size_t>(pair.second));
  const std::vector<int> fold_a = assign_folds(a.size(), cv.folds, pair_seed(base, 0));
  const std::vector<int> fold_b = assign_folds(b.size(), cv.folds, pair_seed(base, 1));

  const bool score_a = !focus || *focus == pair.first;
  const bool score_b = !focus || *focus == pair.second;
  const auto err = [&cv](double pred, double truth) {
    const double e = pred - truth;
    return cv.criterion == CvCriterion::Mae ? std::abs(e) : e * e;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> totals(cv.lambda_grid.size(), 0.0);
  for (int k = 0; k < cv.folds; ++k) {
    const FoldSplit split = split_fold(a, b, fold_a, fold_b, k);
    OptimizerConfig fold_opt = opt;
    fold_opt.seed = pair_seed(opt.seed ^ base, static_cast<std::size_t>(k) + 2);
    for (std::size_t g = 0; g < cv.lambda_grid.size(); ++g) {
      if (!std::isfinite(totals[g])) continue;
      PenaltyConfig pen = penalty;
      pen.lambda = cv.lambda_grid[g];
      double sum = 0.0;
      Index count = 0;
      try {
        ++result.fits;
        const FitResult fit = fit_bivariate(split.train_i, split.train_j, pen, fold_opt, layout);
        const BivariateModel model(fit.params, split.train_i, split.train_j);
        if (score_a) {
          for (Index r = 0; r < split.test_i.size(); ++r, ++count) {
            sum += err(model.predict(split.test_i.X.row(r).transpose(), Side::I).mean, split.test_i.y[r]);
          }
        }
        if (score_b) {
          for (Index r = 0; r < split.test_j.size(); ++r, ++count) {
            sum += err(model.predict(split.test_j.X.row(r).transpose(), Side::J).mean, split.test_j.y[r]);
          }
        }
        totals[g] += count > 0 ? sum / static_cast<double>(count) : 0.0;
      } catch (const NumericalError&) {
        totals[g] = kInf;
      }
    }
  }

  result.scores.resize(totals.size());
  std::size_t best = 0;
  for (std::size_t g = 0; g < totals.size(); ++g) {
    result.scores[g] = totals[g] / cv.folds;
    if (result.scores[g] < result.scores[best]) best = g;
  }
  if (!std::isfinite(result.scores[best])) throw OptimizationError("cross-validation: every grid value failed");
  result.lambda = cv.lambda_grid[best];
  return result;
}

namespace {

PairFit fit_pair(const Dataset& data, const OutputPair& pair, std::size_t index, const PairPlan& plan,
                 const FitAllOptions& options) {
  PairFit out;
  out.pair = pair;
  try {
    const OutputSeries& a = data.outputs[static_cast<std::size_t>(pair.first)];
    const OutputSeries& b = data.outputs[static_cast<std::size_t>(pair.second)];
    OptimizerConfig opt = options.optimizer;
    opt.seed = pair_seed(options.optimizer.seed, index);
    PenaltyConfig penalty = options.penalty;
    if (options.cv && penalty.kind != PenaltyKind::None) {
      CvConfig cv = *options.cv;
      cv.seed = pair_seed(cv.seed, index);
      OptimizerConfig cv_opt = opt;
      if (options.cv_restarts > 0) cv_opt.restarts = options.cv_restarts;
      out.cv = cross_validate_lambda(data, pair, cv, penalty, cv_opt, plan.target, options.layout);
      penalty.lambda = out.cv.lambda;
    }
    out.fit = fit_bivariate(a, b, penalty, opt, options.layout);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
    out.exception = std::current_exception();
  }
  return out;
}

}  // namespace

std::vector<PairFit> fit_all(const Dataset& data, const PairPlan& plan, const FitAllOptions& options) {
  data.validate();
  options.penalty.validate();
  options.optimizer.validate();
  if (options.cv) options.cv->validate();
  if (options.parallelism < 1) throw ArgumentError("parallelism must be >= 1");
  const int n = static_cast<int>(data.size());
  for (const OutputPair& p : plan.pairs) {
    if (p.first < 0 || p.second >= n || p.first >= p.second) throw ArgumentError("plan references an invalid pair");
  }

  std::vector<PairFit> results(plan.pairs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < plan.pairs.size(); k = next++) {
      results[k] = fit_pair(data, plan.pairs[k], k, plan, options);
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), plan.pairs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (!results.empty() && std::none_of(results.begin(), results.end(), [](const PairFit& f) { return f.ok; })) {
    std::rethrow_exception(results.front().exception);
  }
  return results;
}

GaussianPrediction combine_poe(const std::vector<GaussianPrediction>& experts, const std::vector<double>& weights) {
  if (experts.empty()) throw ArgumentError("no experts to combine");
  if (weights.size() != experts.size()) throw ArgumentError("need one weight per expert");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("expert weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("expert weights must sum to 1");

  double precision = 0.0;
  double weighted_mean = 0.0;
  for (std::size_t c = 0; c < experts.size(); ++c) {
    if (!(experts[c].variance > 0.0)) throw ArgumentError("expert variance must be positive");
    const double p = weights[c] / experts[c].variance;
    precision += p;
    weighted_mean += p * experts[c].mean;
  }
  if (!(precision > 0.0)) throw ArgumentError("expert weights are all zero");
  GaussianPrediction out;
  out.variance = 1.0 / precision;
  out.mean = out.variance * weighted_mean;
  return out;
}

std::vector<GaussianPrediction> predict_target(const std::vector<PairFit>& fits, const Dataset& data, int target,
                                               const Matrix& X_test) {
  if (target < 0 || target >= static_cast<int>(data.size())) throw ArgumentError("target output out of range");
  if (X_test.cols() != data.input_dim()) throw ArgumentError("test inputs have the wrong dimension");

  std::vector<BivariateModel> models;
  std::vector<Side> sides;
  for (const PairFit& f : fits) {
    if (!f.ok || (f.pair.first != target && f.pair.second != target)) continue;
    models.emplace_back(f.fit.params, data.outputs[static_cast<std::size_t>(f.pair.first)],
                        data.outputs[static_cast<std::size_t>(f.pair.second)]);
    sides.push_back(f.pair.first == target ? Side::I : Side::J);
  }
  if (models.empty()) throw NumericalError("no successful submodel contains the target output");

  const std::vector<double> weights(models.size(), 1.0 / static_cast<double>(models.size()));
  std::vector<GaussianPrediction> out;
  out.reserve(static_cast<std::size_t>(X_test.rows()));
  std::vector<GaussianPrediction> experts(models.size());
  for (Index r = 0; r < X_test.rows(); ++r) {
    const Vector x0 = X_test.row(r).transpose();
    for (std::size_t c = 0; c < models.size(); ++c) experts[c] = models[c].predict(x0, sides[c]);
    out.push_back(combine_poe(experts, weights));
  }
  return out;
}

}  // namespace mgcp
