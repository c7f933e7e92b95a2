#pragma once

#include <cstddef>
#include <vector>

#include "mgcp/covariance.hpp"

namespace mgcp {

/// Observations of one output: inputs X (p x D, one row per point) and responses y.
struct OutputSeries {
  int id = 0;
  Matrix X;
  Vector y;

  Index size() const { return y.size(); }
};

/// Per-output affine map applied by standardize(): z = (y - mean) / std.
struct Standardization {
  double mean = 0.0;
  double std = 1.0;
};

struct Dataset {
  std::vector<OutputSeries> outputs;
  // Empty unless the responses were standardized; otherwise one entry per output.
  std::vector<Standardization> standardization;
  // Per-output generator coefficients (Setting II); empty for other sources.
  std::vector<double> coefficients;

  std::size_t size() const { return outputs.size(); }
  Index input_dim() const { return outputs.empty() ? 0 : outputs.front().X.cols(); }
  bool standardized() const { return !standardization.empty(); }

  // Position of the output with the given id; throws ArgumentError when absent.
  int index_of(int id) const;
  // Unique ids, consistent dimensions, |y| == rows(X).
  void validate() const;
};

}  // namespace mgcp
