#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mgcp/errors.hpp"
#include "mgcp/predict.hpp"
#include "support/random_params.hpp"

using namespace mgcp;
using namespace mgcp::testing;

namespace {

OutputSeries make_series(int id, const Matrix& X, const Vector& y) {
  OutputSeries s;
  s.id = id;
  s.X = X;
  s.y = y;
  return s;
}

Vector normals(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = z(rng);
  return v;
}

// Predictive mean and variance with an explicit dense inverse.
GaussianPrediction dense_predict(const Matrix& C, const Vector& y, const Vector& k, double prior) {
  const Matrix inv = C.inverse();
  return {k.dot(inv * y), prior - k.dot(inv * k)};
}

}  // namespace

TEST(PredictUnivariate, SingleObservationScalarExample) {
  // Prior f-variance 1 (unit amplitude), noise 1, observation y = 2 at x = 0.
  UnivariateParams p;
  p.terms = {{KernelSpec::isotropic(1.0, 1.0, 1), 1.0}};
  p.sigma = 1.0;
  const OutputSeries s = make_series(1, Matrix::Zero(1, 1), Vector::Constant(1, 2.0));
  const GaussianPrediction g = predict_univariate(p, s, Vector::Zero(1));
  EXPECT_NEAR(g.mean, 1.0, 1e-14);
  EXPECT_NEAR(g.variance, 1.5, 1e-14);
}

TEST(PredictUnivariate, RemoteInputRevertsToPrior) {
  UnivariateParams p;
  p.terms = {{KernelSpec::isotropic(1.3, 1.0, 1), 1.0}};
  p.sigma = 0.2;
  Matrix X(3, 1);
  X << 0.0, 0.5, 1.0;
  Vector y(3);
  y << 2.0, -1.0, 3.0;
  const UnivariateModel m(p, make_series(1, X, y));
  const GaussianPrediction g = m.predict(Vector::Constant(1, 200.0));
  EXPECT_NEAR(g.mean, 0.0, 1e-12);
  EXPECT_NEAR(g.variance, m.prior_variance(), 1e-12);
  EXPECT_NEAR(m.prior_variance(), 1.3 * 1.3 + 0.04, 1e-12);
}

TEST(PredictBivariate, InterpolatesObservedPointWithTinyNoise) {
  std::mt19937_64 rng(1);
  BivariateParams p = random_bivariate(rng, 1);
  p.sigma_i = p.sigma_j = 1e-6;
  Matrix Xi(4, 1), Xj(3, 1);
  Xi << -1.5, -0.2, 0.7, 1.9;
  Xj << -1.0, 0.1, 1.2;
  const OutputSeries a = make_series(1, Xi, normals(rng, 4));
  const OutputSeries b = make_series(2, Xj, normals(rng, 3));
  for (Index r = 0; r < 4; ++r) {
    const GaussianPrediction g = predict_bivariate(p, a, b, Xi.row(r).transpose(), Side::I);
    EXPECT_NEAR(g.mean, a.y[r], 1e-3);
  }
  for (Index r = 0; r < 3; ++r) {
    const GaussianPrediction g = predict_bivariate(p, a, b, Xj.row(r).transpose(), Side::J);
    EXPECT_NEAR(g.mean, b.y[r], 1e-3);
  }
}

TEST(PredictBivariate, FarFromDataRevertsToPrior) {
  std::mt19937_64 rng(2);
  const BivariateParams p = random_bivariate(rng, 2);
  const OutputSeries a = random_series(rng, 1, 6, 2);
  const OutputSeries b = random_series(rng, 2, 5, 2);
  const BivariateModel m(p, a, b);
  // 20 lengthscales of the widest kernel away from every input.
  double widest = 0.0;
  for (const KernelSpec* k : {&p.k_0i, &p.k_0j, &p.k_ii, &p.k_jj})
    widest = std::max(widest, 1.0 / std::sqrt(k->lengthscale_diag.minCoeff()));
  const Vector x0 = Vector::Constant(2, 2.0 + 20.0 * widest);
  for (Side s : {Side::I, Side::J}) {
    const GaussianPrediction g = m.predict(x0, s);
    EXPECT_NEAR(g.mean, 0.0, 1e-10);
    EXPECT_NEAR(g.variance, m.prior_variance(s), 1e-10);
    const Vector zero = Vector::Zero(2);
    EXPECT_NEAR(m.prior_variance(s), marginal_cov(p, s, zero) + p.sigma(s) * p.sigma(s), 1e-12);
  }
}

TEST(PredictBivariate, MatchesDenseOracle) {
  std::mt19937_64 rng(3);
  for (int draw = 0; draw < 20; ++draw) {
    const Index dim = 1 + draw % 2;
    const BivariateParams p = random_bivariate(rng, dim, draw % 3 == 0);
    const OutputSeries a = random_series(rng, 1, 5, dim);
    const OutputSeries b = random_series(rng, 2, 4, dim);
    const Matrix C = assemble_bivariate_cov(p, a.X, b.X);
    Vector y(9);
    y << a.y, b.y;
    const Vector x0 = random_inputs(rng, 1, dim).row(0).transpose();
    for (Side s : {Side::I, Side::J}) {
      Vector k(9);
      for (Index r = 0; r < 5; ++r) k[r] = output_cov(p, s, Side::I, x0, a.X.row(r).transpose());
      for (Index r = 0; r < 4; ++r) k[5 + r] = output_cov(p, s, Side::J, x0, b.X.row(r).transpose());
      const double prior = marginal_cov(p, s, Vector::Zero(dim)) + p.sigma(s) * p.sigma(s);
      const GaussianPrediction want = dense_predict(C, y, k, prior);
      const GaussianPrediction got = predict_bivariate(p, a, b, x0, s);
      EXPECT_NEAR(got.mean, want.mean, 1e-9 * (1.0 + std::abs(want.mean)));
      EXPECT_NEAR(got.variance, want.variance, 1e-9 * prior);
    }
  }
}

TEST(PredictBivariate, Xi0ZeroReducesToUnivariate) {
  std::mt19937_64 rng(4);
  for (int draw = 0; draw < 10; ++draw) {
    const Index dim = 1 + draw % 2;
    BivariateParams p = random_bivariate(rng, dim, draw % 2 == 0);
    p.xi0 = 0.0;
    const OutputSeries a = random_series(rng, 1, 8, dim);
    const OutputSeries b = random_series(rng, 2, 6, dim);
    const BivariateModel joint(p, a, b);
    const UnivariateModel ui(restrict_to_output(p, Side::I), a);
    const UnivariateModel uj(restrict_to_output(p, Side::J), b);
    for (int t = 0; t < 50; ++t) {
      const Vector x0 = random_inputs(rng, 1, dim, -3.0, 3.0).row(0).transpose();
      const GaussianPrediction bi = joint.predict(x0, Side::I), si = ui.predict(x0);
      const GaussianPrediction bj = joint.predict(x0, Side::J), sj = uj.predict(x0);
      EXPECT_NEAR(bi.mean, si.mean, 1e-10);
      EXPECT_NEAR(bi.variance, si.variance, 1e-10);
      EXPECT_NEAR(bj.mean, sj.mean, 1e-10);
      EXPECT_NEAR(bj.variance, sj.variance, 1e-10);
    }
  }
}

TEST(PredictBivariate, VarianceWithinBounds) {
  std::mt19937_64 rng(5);
  for (int draw = 0; draw < 20; ++draw) {
    const BivariateParams p = random_bivariate(rng, 1, true);
    const OutputSeries a = random_series(rng, 1, 7, 1);
    const OutputSeries b = random_series(rng, 2, 7, 1);
    const BivariateModel m(p, a, b);
    for (int t = 0; t < 20; ++t) {
      const Vector x0 = random_inputs(rng, 1, 1, -4.0, 4.0).row(0).transpose();
      for (Side s : {Side::I, Side::J}) {
        const GaussianPrediction g = m.predict(x0, s);
        EXPECT_GT(g.variance, 0.0);
        EXPECT_LE(g.variance, m.prior_variance(s) * (1.0 + 1e-12));
      }
    }
  }
}

TEST(PredictFull, TwoOutputsAgreeWithBivariate) {
  std::mt19937_64 rng(6);
  for (int draw = 0; draw < 5; ++draw) {
    // Full model has no unique latents: match with xi0 = 1 and zero-amplitude unique kernels.
    BivariateParams p = random_bivariate(rng, 1);
    p.xi0 = 1.0;
    p.k_ii.amplitude = p.k_jj.amplitude = 0.0;
    FullMgcpParams full;
    full.num_outputs = 2;
    full.pair_kernels[{0, 1}] = {p.k_0i, p.k_0j};
    full.latent_scales[{0, 1}] = 1.0;
    full.noise = Vector(2);
    full.noise << p.sigma_i, p.sigma_j;
    Dataset data;
    data.outputs = {random_series(rng, 1, 6, 1), random_series(rng, 2, 5, 1)};
    for (int t = 0; t < 10; ++t) {
      const Vector x0 = random_inputs(rng, 1, 1).row(0).transpose();
      for (int target : {0, 1}) {
        const Side s = target == 0 ? Side::I : Side::J;
        const GaussianPrediction f = predict_full_mgcp(full, data, x0, target);
        const GaussianPrediction b = predict_bivariate(p, data.outputs[0], data.outputs[1], x0, s);
        EXPECT_NEAR(f.mean, b.mean, 1e-10);
        EXPECT_NEAR(f.variance, b.variance, 1e-10);
      }
    }
  }
}

TEST(PredictFull, ZeroLatentScalesGivePureNoise) {
  std::mt19937_64 rng(7);
  FullMgcpParams full;
  full.num_outputs = 3;
  for (auto pair : {OutputPair{0, 1}, OutputPair{0, 2}, OutputPair{1, 2}}) {
    full.pair_kernels[pair] = {random_kernel(rng, 1), random_kernel(rng, 1)};
    full.latent_scales[pair] = 0.0;
  }
  full.noise = Vector(3);
  full.noise << 0.3, 0.4, 0.5;
  Dataset data;
  data.outputs = {random_series(rng, 1, 3, 1), random_series(rng, 2, 3, 1), random_series(rng, 3, 3, 1)};
  const GaussianPrediction g = predict_full_mgcp(full, data, Vector::Constant(1, 0.1), 2);
  EXPECT_NEAR(g.mean, 0.0, 1e-14);
  EXPECT_NEAR(g.variance, 0.25, 1e-14);
}

TEST(PredictFull, ThreeOutputsMatchDenseOracle) {
  std::mt19937_64 rng(8);
  FullMgcpParams full;
  full.num_outputs = 3;
  for (auto pair : {OutputPair{0, 1}, OutputPair{0, 2}, OutputPair{1, 2}}) {
    full.pair_kernels[pair] = {random_kernel(rng, 1), random_kernel(rng, 1)};
    full.latent_scales[pair] = 1.0;
  }
  full.noise = Vector::Constant(3, 0.2);
  Dataset data;
  for (int c = 0; c < 3; ++c) data.outputs.push_back(random_series(rng, c + 1, 3, 1));
  std::vector<Matrix> X;
  Vector y(9);
  for (int c = 0; c < 3; ++c) {
    X.push_back(data.outputs[c].X);
    y.segment(3 * c, 3) = data.outputs[c].y;
  }
  // Dense oracle: each entry of C and k summed term by term from cross_cov_term.
  const auto cov = [&](int a, double xa, int b, double xb) {
    double v = 0.0;
    for (const auto& [pair, kernels] : full.pair_kernels) {
      if ((pair.first != a && pair.second != a) || (pair.first != b && pair.second != b)) continue;
      const KernelSpec& ka = a == pair.first ? kernels.first : kernels.second;
      const KernelSpec& kb = b == pair.first ? kernels.first : kernels.second;
      v += cross_cov_term(ka, kb, 1.0, Vector::Constant(1, xa - xb));
    }
    return v;
  };
  Matrix C(9, 9);
  for (int a = 0; a < 3; ++a)
    for (int r = 0; r < 3; ++r)
      for (int b = 0; b < 3; ++b)
        for (int s = 0; s < 3; ++s)
          C(3 * a + r, 3 * b + s) = cov(a, X[a](r, 0), b, X[b](s, 0)) + (a == b && r == s ? 0.04 : 0.0);
  const double x0 = 0.37;
  for (int target = 0; target < 3; ++target) {
    Vector k(9);
    for (int b = 0; b < 3; ++b)
      for (int s = 0; s < 3; ++s) k[3 * b + s] = cov(target, x0, b, X[b](s, 0));
    const GaussianPrediction want = dense_predict(C, y, k, cov(target, x0, target, x0) + 0.04);
    const GaussianPrediction got = predict_full_mgcp(full, data, Vector::Constant(1, x0), target);
    EXPECT_NEAR(got.mean, want.mean, 1e-10);
    EXPECT_NEAR(got.variance, want.variance, 1e-10);
  }
}

TEST(PrecisionBlock, TwoByTwoClosedForm) {
  Matrix C(2, 2);
  C << 3.0, 0.7, 0.7, 2.0;
  const Matrix B = precision_block(C, 1);
  ASSERT_EQ(B.rows(), 1);
  ASSERT_EQ(B.cols(), 1);
  EXPECT_NEAR(B(0, 0), -0.7 / (3.0 * 2.0 - 0.49), 1e-14);
}

TEST(PrecisionBlock, BlockDiagonalGivesZeroBlock) {
  std::mt19937_64 rng(9);
  for (int draw = 0; draw < 20; ++draw) {
    BivariateParams p = random_bivariate(rng, 1);
    p.xi0 = 0.0;
    const Matrix X = random_inputs(rng, 10, 1);
    const Matrix C = assemble_bivariate_cov(p, X, X);
    EXPECT_LT(precision_block(C, 10).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PrecisionBlock, NonzeroSharingGivesNonzeroBlock) {
  std::mt19937_64 rng(10);
  for (int draw = 0; draw < 20; ++draw) {
    BivariateParams p = random_bivariate(rng, 1);
    p.xi0 = uniform(rng, 0.5, 2.0);
    const Matrix X = random_inputs(rng, 10, 1);
    const Matrix C = assemble_bivariate_cov(p, X, X);
    const Matrix B = precision_block(C, 10);
    EXPECT_GT(B.cwiseAbs().maxCoeff(), 1e-6);
    // Matches -C_ii^{-1} C_ij (C_jj - C_ji C_ii^{-1} C_ij)^{-1}.
    const Matrix Cii = C.topLeftCorner(10, 10), Cij = C.topRightCorner(10, 10), Cjj = C.bottomRightCorner(10, 10);
    const Matrix schur = Cjj - Cij.transpose() * Cii.inverse() * Cij;
    const Matrix want = -Cii.inverse() * Cij * schur.inverse();
    EXPECT_LT((B - want).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + want.cwiseAbs().maxCoeff()));
  }
}

TEST(PrecisionBlock, SingularInputThrows) {
  Matrix C(2, 2);
  C << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(precision_block(C, 1), NumericalError);
  Matrix D(2, 2);
  D << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(precision_block(D, 1), NumericalError);
}
