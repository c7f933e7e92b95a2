#pragma once

#include "mgcp/covariance.hpp"

namespace mgcp {

// Mean absolute error; throws ArgumentError on empty or mismatched inputs.
double mae(const Vector& pred, const Vector& truth);

// Mean squared error divided by `truth_variance` (> 0).
double smse(const Vector& pred, const Vector& truth, double truth_variance);

// n-1 sample variance.
double sample_variance(const Vector& v);

}  // namespace mgcp
