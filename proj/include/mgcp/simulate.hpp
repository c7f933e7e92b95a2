#pragma once

#include <cstdint>
#include <functional>

#include "mgcp/data.hpp"
#include "mgcp/predict.hpp"

namespace mgcp {

// n evenly spaced points on [lo, hi] with exact endpoints.
Vector linspace(double lo, double hi, Index n);

/// Generated data plus the noise-free signal of each output (0-based position).
struct Simulation {
  Dataset data;
  std::function<double(int output, double x)> truth;
  // Interval used for evaluation points.
  double test_lo = 0.0;
  double test_hi = 1.0;
};

// N outputs y = 1 + sin(x) + eps on p evenly spaced x in [0, 10].
Simulation gen_setting1(int num_outputs = 5, Index p = 10, double sigma = 0.1, std::uint64_t seed = 0);

double setting2_truth(double e, double x);
// y = 1 + e x^2 + eps, e ~ U(0.8, 1.2) per output; the last output is observed on [0, 7] only.
Simulation gen_setting2(int num_outputs = 5, Index p_train = 20, Index p_target = 10, double sigma = 1.0,
                        std::uint64_t seed = 0);

// 1 -> x^2, 2 -> x^2 / (2 (1 - x)), 3 -> x^2 / (1 - x).
double setting3_truth(int family, double x);
// Family (1, 2 or 3) of the output at a 0-based position of the eight-output setting.
int setting3_family(int output);
// Outputs 1-4 family 1, 5-6 family 2, 7-8 family 3; seven points on [0, 0.8].
Simulation gen_setting3(double sigma = 0.005, std::uint64_t seed = 0);

/// Per-output z-scoring with the n-1 sample standard deviation. The map is stored in
/// Dataset::standardization. Throws DegenerateDataError for outputs with < 2 points or zero spread,
/// unless `allow_degenerate` is set, in which case such outputs are only centered (std recorded as 1).
Dataset standardize(const Dataset& data, bool allow_degenerate = false);

GaussianPrediction destandardize(const GaussianPrediction& pred, const Standardization& s);
double destandardize(double value, const Standardization& s);

}  // namespace mgcp
