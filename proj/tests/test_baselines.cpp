#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mgcp/baselines.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/likelihood.hpp"
#include "mgcp/simulate.hpp"
#include "support/finite_difference.hpp"
#include "support/random_params.hpp"

using namespace mgcp;
using mgcp::testing::relative_error;

namespace {

FullMgcpParams random_full(std::mt19937_64& rng, int n, Index dim) {
  FullMgcpParams p;
  p.num_outputs = n;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      p.pair_kernels[{a, b}] = {mgcp::testing::random_kernel(rng, dim), mgcp::testing::random_kernel(rng, dim)};
      p.latent_scales[{a, b}] = 1.0;
    }
  }
  p.noise.resize(n);
  for (int c = 0; c < n; ++c) p.noise[c] = mgcp::testing::uniform(rng, 0.1, 0.5);
  return p;
}

}  // namespace

TEST(FullParamCount, PublishedValues) {
  EXPECT_EQ(full_param_count(5, 1), 45);
  EXPECT_EQ(full_param_count(30, 1), 1770);
}

TEST(FullParamCount, FormulaScanMatchesPackedLength) {
  std::mt19937_64 rng(1);
  for (int n = 2; n <= 10; ++n) {
    for (Index d = 1; d <= 3; ++d) {
      EXPECT_EQ(full_param_count(n, d), n * (n - 1) * (1 + d) + n);
      EXPECT_EQ(pack_full(random_full(rng, n, d)).size(), full_param_count(n, d));
    }
  }
  EXPECT_THROW(full_param_count(1, 1), ArgumentError);
}

TEST(FullMgcp, PackRoundTrip) {
  std::mt19937_64 rng(2);
  const FullMgcpParams p = random_full(rng, 4, 2);
  const FullMgcpParams q = unpack_full(pack_full(p), 4, 2);
  for (const auto& [pair, kernels] : p.pair_kernels) {
    EXPECT_NEAR(q.kernel(pair, pair.first).amplitude, kernels.first.amplitude, 1e-13);
    EXPECT_NEAR(q.kernel(pair, pair.second).lengthscale_diag[1], kernels.second.lengthscale_diag[1], 1e-13);
  }
  EXPECT_LT((q.noise - p.noise).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FullMgcp, TwoOutputNllEqualsBivariate) {
  std::mt19937_64 rng(3);
  for (int draw = 0; draw < 10; ++draw) {
    const Index dim = 1 + draw % 2;
    const FullMgcpParams full = random_full(rng, 2, dim);
    BivariateParams bi;
    bi.k_0i = full.kernel({0, 1}, 0);
    bi.k_0j = full.kernel({0, 1}, 1);
    bi.k_ii = bi.k_jj = KernelSpec{0.0, Vector::Ones(dim)};
    bi.xi0 = 1.0;
    bi.sigma_i = full.noise[0];
    bi.sigma_j = full.noise[1];
    Dataset data;
    data.outputs = {mgcp::testing::random_series(rng, 1, 6, dim), mgcp::testing::random_series(rng, 2, 4, dim)};
    EXPECT_NEAR(full_nll(full, data), nll(bi, data.outputs[0], data.outputs[1]), 1e-10);
  }
}

TEST(FullMgcp, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int draw = 0; draw < 5; ++draw) {
    const int n = 2 + draw % 2;
    const Index dim = 1 + draw % 2;
    const FullMgcpParams p = random_full(rng, n, dim);
    Dataset data;
    for (int c = 0; c < n; ++c) data.outputs.push_back(mgcp::testing::random_series(rng, c + 1, 4, dim));
    const Vector x = pack_full(p);
    const Vector analytic = full_nll_grad(p, data);
    const Vector numeric = mgcp::testing::numeric_gradient(
        [&](const Vector& v) { return full_nll(unpack_full(v, n, dim), data); }, x);
    for (Index k = 0; k < x.size(); ++k) EXPECT_LT(relative_error(analytic[k], numeric[k]), 1e-5) << k;
  }
}

TEST(FullMgcp, SizeGuard) {
  const Simulation sim = gen_setting1(2, 251, 0.1, 1);
  OptimizerConfig cfg;
  cfg.restarts = 1;
  EXPECT_THROW(fit_full_mgcp(sim.data, cfg), SizeError);
}

TEST(FullMgcp, FitImprovesOnStartAndReportsCount) {
  const Simulation sim = gen_setting1(3, 8, 0.1, 2);
  OptimizerConfig cfg;
  cfg.restarts = 1;
  cfg.max_iters = 50;
  const FullFitResult r = fit_full_mgcp(sim.data, cfg);
  EXPECT_EQ(r.param_count, full_param_count(3, 1));
  EXPECT_TRUE(std::isfinite(r.objective));
  EXPECT_EQ(r.objective, full_nll(r.params, sim.data));
  ASSERT_FALSE(r.trace.empty());
  EXPECT_LE(r.objective, r.trace.front().objective);
}

TEST(Gcp, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int draw = 0; draw < 20; ++draw) {
    const Index dim = 1 + draw % 2;
    UnivariateParams p;
    p.terms = {{mgcp::testing::random_kernel(rng, dim), 1.0}};
    p.sigma = mgcp::testing::uniform(rng, 0.1, 0.5);
    const OutputSeries s = mgcp::testing::random_series(rng, 1, 7, dim);
    const Vector analytic = gcp_nll_grad(p, s);
    const Vector numeric = mgcp::testing::numeric_gradient(
        [&](const Vector& v) { return gcp_nll(unpack_gcp(v), s); }, pack_gcp(p));
    for (Index k = 0; k < analytic.size(); ++k) EXPECT_LT(relative_error(analytic[k], numeric[k]), 1e-5);
  }
}

TEST(Gcp, NoiseFreeQuadraticInterpolates) {
  OutputSeries s;
  s.id = 1;
  s.X = linspace(0.0, 1.0, 15);
  s.y = s.X.col(0).array().square();
  OptimizerConfig cfg;
  cfg.seed = 3;
  const GcpFitResult r = fit_gcp(s, cfg);
  const UnivariateModel m(r.params, s);
  double err = 0.0;
  for (Index k = 0; k < 15; ++k) err += std::abs(m.predict(s.X.row(k).transpose()).mean - s.y[k]);
  EXPECT_LT(err / 15.0, 1e-2);
}

TEST(Gcp, DegenerateAndDeterministic) {
  OutputSeries flat;
  flat.id = 1;
  flat.X = linspace(0.0, 1.0, 5);
  flat.y = Vector::Constant(5, 3.0);
  EXPECT_THROW(fit_gcp(flat, {}), DegenerateDataError);
  OutputSeries one = flat;
  one.X = Matrix::Zero(1, 1);
  one.y = Vector::Ones(1);
  EXPECT_THROW(fit_gcp(one, {}), DegenerateDataError);

  const Simulation sim = gen_setting1(2, 10, 0.1, 9);
  OptimizerConfig cfg;
  cfg.seed = 17;
  const GcpFitResult a = fit_gcp(sim.data.outputs[0], cfg);
  const GcpFitResult b = fit_gcp(sim.data.outputs[0], cfg);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.params.sigma, b.params.sigma);
}
