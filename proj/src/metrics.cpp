#include "mgcp/metrics.hpp"

#include <cmath>

#include "mgcp/errors.hpp"

namespace mgcp {

namespace {

void check_lengths(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size()) throw ArgumentError("prediction and truth lengths differ");
  if (pred.size() < 1) throw ArgumentError("metrics need at least one point");
}

}  // namespace

double mae(const Vector& pred, const Vector& truth) {
  check_lengths(pred, truth);
  return (pred - truth).cwiseAbs().mean();
}

double smse(const Vector& pred, const Vector& truth, double truth_variance) {
  check_lengths(pred, truth);
  if (!(truth_variance > 0.0) || !std::isfinite(truth_variance)) throw ArgumentError("truth variance must be > 0");
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size()) / truth_variance;
}

double sample_variance(const Vector& v) {
  if (v.size() < 2) throw ArgumentError("sample variance needs at least two values");
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace mgcp
