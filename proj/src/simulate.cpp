#include "mgcp/simulate.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

Vector linspace(double lo, double hi, Index n) {
  if (n < 1) throw ArgumentError("linspace needs at least one point");
  Vector v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (Index k = 0; k < n; ++k) v[k] = lo + step * static_cast<double>(k);
  v[n - 1] = hi;
  return v;
}

namespace {

OutputSeries make_series(int id, const Vector& x, const std::function<double(double)>& f, double sigma,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  OutputSeries s;
  s.id = id;
  s.X = x;
  s.y.resize(x.size());
  for (Index k = 0; k < x.size(); ++k) s.y[k] = f(x[k]) + sigma * noise(rng);
  return s;
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("noise sigma must be finite and >= 0");
}

}  // namespace

Simulation gen_setting1(int num_outputs, Index p, double sigma, std::uint64_t seed) {
  if (num_outputs < 2) throw ArgumentError("setting 1 needs at least two outputs");
  if (p < 2) throw ArgumentError("setting 1 needs at least two points per output");
  check_sigma(sigma);
  std::mt19937_64 rng(seed);
  const auto f = [](double x) { return 1.0 + std::sin(x); };
  Simulation sim;
  const Vector x = linspace(0.0, 10.0, p);
  for (int k = 0; k < num_outputs; ++k) sim.data.outputs.push_back(make_series(k + 1, x, f, sigma, rng));
  sim.truth = [](int, double x) { return 1.0 + std::sin(x); };
  sim.test_lo = 0.0;
  sim.test_hi = 10.0;
  return sim;
}

double setting2_truth(double e, double x) { return 1.0 + e * x * x; }

Simulation gen_setting2(int num_outputs, Index p_train, Index p_target, double sigma, std::uint64_t seed) {
  if (num_outputs < 2) throw ArgumentError("setting 2 needs at least two outputs");
  if (p_train < 2 || p_target < 2) throw ArgumentError("setting 2 needs at least two points per output");
  check_sigma(sigma);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.8, 1.2);
  Simulation sim;
  for (int k = 0; k < num_outputs; ++k) {
    const double e = coef(rng);
    sim.data.coefficients.push_back(e);
    const bool target = k == num_outputs - 1;
    const Vector x = target ? linspace(0.0, 7.0, p_target) : linspace(0.0, 10.0, p_train);
    sim.data.outputs.push_back(make_series(k + 1, x, [e](double v) { return setting2_truth(e, v); }, sigma, rng));
  }
  const std::vector<double> coefficients = sim.data.coefficients;
  sim.truth = [coefficients](int output, double x) {
    return setting2_truth(coefficients.at(static_cast<std::size_t>(output)), x);
  };
  sim.test_lo = 0.0;
  sim.test_hi = 10.0;
  return sim;
}

double setting3_truth(int family, double x) {
  switch (family) {
    case 1: return x * x;
    case 2: return x * x / (2.0 * (1.0 - x));
    case 3: return x * x / (1.0 - x);
    default: throw ArgumentError("setting 3 family must be 1, 2 or 3");
  }
}

int setting3_family(int output) {
  if (output < 0 || output > 7) throw ArgumentError("setting 3 has outputs 0..7");
  return output < 4 ? 1 : (output < 6 ? 2 : 3);
}

Simulation gen_setting3(double sigma, std::uint64_t seed) {
  check_sigma(sigma);
  std::mt19937_64 rng(seed);
  Simulation sim;
  const Vector x = linspace(0.0, 0.8, 7);
  for (int k = 0; k < 8; ++k) {
    const int family = setting3_family(k);
    sim.data.outputs.push_back(
        make_series(k + 1, x, [family](double v) { return setting3_truth(family, v); }, sigma, rng));
  }
  sim.truth = [](int output, double v) { return setting3_truth(setting3_family(output), v); };
  sim.test_lo = 0.0;
  sim.test_hi = 0.8;
  return sim;
}

Dataset standardize(const Dataset& data, bool allow_degenerate) {
  data.validate();
  Dataset out = data;
  out.standardization.clear();
  for (OutputSeries& s : out.outputs) {
    const double mean = s.size() > 0 ? s.y.mean() : 0.0;
    const double var =
        s.size() > 1 ? (s.y.array() - mean).square().sum() / static_cast<double>(s.size() - 1) : 0.0;
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      if (!allow_degenerate) {
        throw DegenerateDataError("output " + std::to_string(s.id) +
                                  (s.size() < 2 ? " needs two points to standardize" : " has zero variance"));
      }
      s.y = (s.y.array() - mean).matrix();
      out.standardization.push_back({mean, 1.0});
      continue;
    }
    s.y = ((s.y.array() - mean) / sd).matrix();
    out.standardization.push_back({mean, sd});
  }
  return out;
}

GaussianPrediction destandardize(const GaussianPrediction& pred, const Standardization& s) {
  return {pred.mean * s.std + s.mean, pred.variance * s.std * s.std};
}

double destandardize(double value, const Standardization& s) { return value * s.std + s.mean; }

}  // namespace mgcp
