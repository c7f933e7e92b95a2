#include <cmath>

#include <gtest/gtest.h>

#include "mgcp/errors.hpp"
#include "mgcp/metrics.hpp"
#include "mgcp/simulate.hpp"

using namespace mgcp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

}  // namespace

TEST(Linspace, ExactEndpointsAndSpacing) {
  const Vector x = linspace(0.0, 0.8, 7);
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(x[6], 0.8);
  for (Index k = 1; k < 7; ++k) EXPECT_NEAR(x[k] - x[k - 1], 0.8 / 6.0, 1e-15);
  EXPECT_THROW(linspace(0.0, 1.0, 0), ArgumentError);
}

TEST(Setting1, ShapeTruthAndNoiseFree) {
  const Simulation sim = gen_setting1();
  ASSERT_EQ(sim.data.size(), 5u);
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_EQ(sim.data.outputs[c].id, static_cast<int>(c) + 1);
    EXPECT_EQ(sim.data.outputs[c].size(), 10);
    EXPECT_EQ(sim.data.outputs[c].X(0, 0), 0.0);
    EXPECT_EQ(sim.data.outputs[c].X(9, 0), 10.0);
  }
  EXPECT_EQ(sim.truth(0, 0.0), 1.0);
  const Simulation clean = gen_setting1(3, 12, 0.0, 4);
  for (const OutputSeries& s : clean.data.outputs)
    for (Index k = 0; k < s.size(); ++k) EXPECT_EQ(s.y[k], 1.0 + std::sin(s.X(k, 0)));
  EXPECT_THROW(gen_setting1(1), ArgumentError);
}

TEST(Setting1, SeededDeterminism) {
  const Simulation a = gen_setting1(5, 10, 0.1, 77);
  const Simulation b = gen_setting1(5, 10, 0.1, 77);
  const Simulation c = gen_setting1(5, 10, 0.1, 78);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a.data.outputs[k].y, b.data.outputs[k].y);
    EXPECT_NE(a.data.outputs[k].y, c.data.outputs[k].y);
  }
}

TEST(Setting1, NoiseStdWithinThreePercent) {
  const Simulation sim = gen_setting1(10, 1000, 0.1, 5);
  Vector noise(10000);
  Index k = 0;
  for (const OutputSeries& s : sim.data.outputs)
    for (Index r = 0; r < s.size(); ++r) noise[k++] = s.y[r] - sim.truth(0, s.X(r, 0));
  EXPECT_NEAR(std::sqrt(sample_variance(noise)), 0.1, 0.003);
}

TEST(Setting2, TargetDomainAndCoefficients) {
  const Simulation sim = gen_setting2();
  ASSERT_EQ(sim.data.size(), 5u);
  ASSERT_EQ(sim.data.coefficients.size(), 5u);
  for (double e : sim.data.coefficients) {
    EXPECT_GE(e, 0.8);
    EXPECT_LE(e, 1.2);
  }
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(sim.data.outputs[c].size(), 20);
    EXPECT_EQ(sim.data.outputs[c].X.maxCoeff(), 10.0);
  }
  EXPECT_EQ(sim.data.outputs[4].size(), 10);
  EXPECT_EQ(sim.data.outputs[4].X.maxCoeff(), 7.0);
  EXPECT_EQ(sim.data.outputs[4].id, 5);
  EXPECT_EQ(setting2_truth(1.0, 3.0), 10.0);
  EXPECT_EQ(sim.truth(2, 2.0), setting2_truth(sim.data.coefficients[2], 2.0));
}

TEST(Setting3, FamiliesAndGrid) {
  EXPECT_NEAR(setting3_truth(2, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(setting3_truth(3, 0.5), 0.5, 1e-15);
  EXPECT_EQ(setting3_truth(1, 0.5), 0.25);
  const int families[8] = {1, 1, 1, 1, 2, 2, 3, 3};
  for (int c = 0; c < 8; ++c) EXPECT_EQ(setting3_family(c), families[c]);
  const Simulation clean = gen_setting3(0.0, 1);
  ASSERT_EQ(clean.data.size(), 8u);
  for (int c = 0; c < 8; ++c) {
    const OutputSeries& s = clean.data.outputs[static_cast<std::size_t>(c)];
    ASSERT_EQ(s.size(), 7);
    EXPECT_EQ(s.X(6, 0), 0.8);
    for (Index k = 0; k < 7; ++k) EXPECT_EQ(s.y[k], setting3_truth(families[c], s.X(k, 0)));
  }
  for (Index k = 0; k < 7; ++k) {
    const double x = clean.data.outputs[0].X(k, 0);
    EXPECT_EQ(clean.data.outputs[0].y[k], x * x);
  }
}

TEST(Standardize, ExampleAndRoundTrip) {
  Dataset d;
  d.outputs = {{1, linspace(0.0, 1.0, 3), vec({1.0, 2.0, 3.0})}, {2, linspace(0.0, 1.0, 4), vec({5.0, -1.0, 2.5, 8.0})}};
  const Dataset z = standardize(d);
  ASSERT_TRUE(z.standardized());
  EXPECT_LT((z.outputs[0].y - vec({-1.0, 0.0, 1.0})).cwiseAbs().maxCoeff(), 1e-15);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_NEAR(z.outputs[c].y.mean(), 0.0, 1e-12);
    EXPECT_NEAR(sample_variance(z.outputs[c].y), 1.0, 1e-12);
    for (Index k = 0; k < d.outputs[c].size(); ++k)
      EXPECT_NEAR(destandardize(z.outputs[c].y[k], z.standardization[c]), d.outputs[c].y[k], 1e-12);
  }
  const GaussianPrediction g = destandardize(GaussianPrediction{1.0, 4.0}, z.standardization[1]);
  const double sd = z.standardization[1].std;
  EXPECT_NEAR(g.mean, z.standardization[1].mean + sd, 1e-12);
  EXPECT_NEAR(g.variance, 4.0 * sd * sd, 1e-12);
}

TEST(Standardize, ConstantOutputIsDegenerate) {
  Dataset d;
  d.outputs = {{1, linspace(0.0, 1.0, 3), vec({2.0, 2.0, 2.0})}};
  EXPECT_THROW(standardize(d), DegenerateDataError);
}

TEST(Mae, Examples) {
  EXPECT_EQ(mae(vec({1.0, 2.0}), vec({1.0, 3.0})), 0.5);
  EXPECT_EQ(mae(vec({4.0, -2.0}), vec({4.0, -2.0})), 0.0);
  EXPECT_EQ(mae(vec({0.0, 0.0, 0.0}), vec({1.0, -2.0, 3.0})), 2.0);
  EXPECT_THROW(mae(vec({1.0}), vec({1.0, 2.0})), ArgumentError);
  EXPECT_THROW(mae(Vector(), Vector()), ArgumentError);
}

TEST(Mae, TranslationEquivariant) {
  const Vector p = vec({0.3, -1.2, 5.0}), t = vec({1.0, 0.0, 4.5});
  EXPECT_NEAR(mae(p.array() + 7.5, t.array() + 7.5), mae(p, t), 1e-14);
}

TEST(Smse, Examples) {
  EXPECT_EQ(smse(vec({0.0, 2.0}), vec({1.0, 1.0}), 1.0), 1.0);
  const Vector t = vec({1.0, 4.0, -2.0, 0.5, 3.0, 2.2, -1.0, 0.0});
  EXPECT_EQ(smse(t, t, 2.0), 0.0);
  const Vector mean_pred = Vector::Constant(t.size(), t.mean());
  // The n-1 variance normalizer leaves (n-1)/n for the mean predictor.
  EXPECT_NEAR(smse(mean_pred, t, sample_variance(t)), 7.0 / 8.0, 1e-12);
  EXPECT_THROW(smse(t, t, 0.0), ArgumentError);
}

TEST(Standardize, AllowDegenerateOnlyCenters) {
  Dataset d;
  d.outputs = {{1, linspace(0.0, 1.0, 3), vec({2.0, 2.0, 2.0})}, {2, linspace(0.0, 1.0, 3), vec({1.0, 2.0, 3.0})}};
  const Dataset z = standardize(d, true);
  EXPECT_EQ(z.outputs[0].y, Vector::Zero(3));
  EXPECT_EQ(z.standardization[0].mean, 2.0);
  EXPECT_EQ(z.standardization[0].std, 1.0);
  EXPECT_EQ(z.standardization[1].std, 1.0);
  EXPECT_EQ(z.outputs[1].y, vec({-1.0, 0.0, 1.0}));
}
