#include <gtest/gtest.h>

#include <cmath>

#include "wnpg/noise.hpp"

using namespace wnpg;

TEST(Noise, ZeroSigmaIsDegenerateAndLeavesGeneratorUntouched) {
  Rng rng(123), ref(123);
  const Vec eps = sample({NoiseKind::gaussian, 2, 0.0}, rng);
  EXPECT_EQ(eps, Vec({0.0, 0.0}));
  EXPECT_EQ(rng(), ref());
}

TEST(Noise, UniformDrawsStayInsideTheHypercube) {
  Rng rng(5);
  const double half = std::sqrt(3.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec e = sample({NoiseKind::uniform, 1, 1.0}, rng);
    ASSERT_GE(e[0], -half);
    ASSERT_LE(e[0], half);
  }
}

TEST(Noise, SameSeedReproducesBitExactly) {
  Rng a(42), b(42);
  const NoiseSpec ns{NoiseKind::gaussian, 3, 2.0};
  EXPECT_EQ(sample(ns, a), sample(ns, b));
}

TEST(Noise, GaussianScoreIsMinusEpsOverVariance) {
  EXPECT_EQ(score_gradient({NoiseKind::gaussian, 2, 1.0}, Vec{1.0, -1.0}), Vec({-1.0, 1.0}));
  EXPECT_EQ(score_gradient({NoiseKind::gaussian, 2, 2.0}, Vec{4.0, 0.0}), Vec({-1.0, -0.0}));
}

TEST(Noise, ScoreMatchesDerivativeOfLogDensity) {
  const NoiseSpec ns{NoiseKind::gaussian, 3, 0.7};
  const Vec eps = {0.2, -0.5, 1.1};
  const Vec g = score_gradient(ns, eps);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    Vec up = eps, down = eps;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    EXPECT_NEAR((log_density(ns, up) - log_density(ns, down)) / 2e-6, g[i], 1e-6);
  }
}

TEST(Noise, ScoreRejectsUniformAndZeroSigma) {
  EXPECT_THROW(score_gradient({NoiseKind::uniform, 1, 1.0}, Vec{0.1}), Error);
  EXPECT_THROW(score_gradient({NoiseKind::gaussian, 1, 0.0}, Vec{0.1}), Error);
  EXPECT_THROW(score_second_moment_analytic({NoiseKind::uniform, 1, 1.0}), Error);
  EXPECT_THROW(score_second_moment_analytic({NoiseKind::gaussian, 1, 0.0}), Error);
  EXPECT_THROW(score_gradient({NoiseKind::gaussian, 2, 1.0}, Vec{0.1}), Error);
}

TEST(Noise, ScoreSecondMomentAnalytic) {
  EXPECT_DOUBLE_EQ(score_second_moment_analytic({NoiseKind::gaussian, 3, 2.0}), 0.75);
  EXPECT_DOUBLE_EQ(score_second_moment_analytic({NoiseKind::gaussian, 1, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(score_second_moment_analytic({NoiseKind::gaussian, 4, 0.5}), 16.0);
}

TEST(Noise, ScoreSecondMomentMonteCarlo) {
  const NoiseSpec ns{NoiseKind::gaussian, 3, 2.0};
  Rng rng(9);
  double acc = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) acc += squared_norm(score_gradient(ns, sample(ns, rng)));
  EXPECT_NEAR(acc / n / 0.75, 1.0, 0.02);
}

TEST(Noise, EmpiricalMomentsAttainTheWhiteNoiseBound) {
  Rng rng(11);
  const auto g = empirical_moment_check({NoiseKind::gaussian, 2, 1.0}, 1000000, rng);
  EXPECT_NEAR(g.mean_sq_norm, 2.0, 0.02);
  EXPECT_TRUE(g.within_tolerance(1.0, 2));

  const auto u = empirical_moment_check({NoiseKind::uniform, 1, 1.0}, 1000000, rng);
  EXPECT_NEAR(u.mean_sq_norm, 1.0, 0.01);
  EXPECT_TRUE(u.within_tolerance(1.0, 1));

  const auto z = empirical_moment_check({NoiseKind::gaussian, 1, 0.0}, 1000, rng);
  EXPECT_EQ(z.mean_sq_norm, 0.0);
  EXPECT_EQ(z.mean_norm, 0.0);
}

TEST(Noise, MomentRatioWithinOnePercentForBothKinds) {
  for (NoiseKind k : {NoiseKind::gaussian, NoiseKind::uniform}) {
    for (double sigma : {0.1, 3.0}) {
      Rng rng(17);
      const auto r = empirical_moment_check({k, 4, sigma}, 1000000, rng);
      const double ratio = r.mean_sq_norm / r.bound;
      EXPECT_GE(ratio, 0.99);
      EXPECT_LE(ratio, 1.01);
    }
  }
}

TEST(Noise, MomentCheckNeedsEnoughSamples) {
  Rng rng(1);
  EXPECT_THROW(empirical_moment_check({NoiseKind::gaussian, 1, 1.0}, 999, rng), Error);
}

TEST(Noise, InvalidSpecsAreRejected) {
  Rng rng(1);
  EXPECT_THROW(sample({NoiseKind::gaussian, 0, 1.0}, rng), Error);
  EXPECT_THROW(sample({NoiseKind::gaussian, 1, -1.0}, rng), Error);
  EXPECT_EQ(noise_kind_from_string("uniform"), NoiseKind::uniform);
  EXPECT_THROW(noise_kind_from_string("laplace"), Error);
}
