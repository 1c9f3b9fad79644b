#include <gtest/gtest.h>

#include <cmath>

#include "wnpg/optimize.hpp"

using namespace wnpg;

namespace {

OptimizerState make(OptimizerKind kind, double zeta, std::size_t dim) { return {OptimizerConfig{kind, zeta, {}}, dim}; }

}  // namespace

TEST(Optimizer, ConstantStepAscends) {
  const auto out = step(make(OptimizerKind::constant, 0.1, 2), Vec{1.0, 1.0}, Vec{1.0, -2.0});
  EXPECT_NEAR(out.theta[0], 1.1, 1e-15);
  EXPECT_NEAR(out.theta[1], 0.8, 1e-15);
  EXPECT_EQ(out.state.t, 1u);
}

TEST(Optimizer, ConstantZeroGradientLeavesThetaUnchanged) {
  EXPECT_EQ(step(make(OptimizerKind::constant, 0.3, 2), Vec{0.4, -7.0}, Vec{0.0, 0.0}).theta, Vec({0.4, -7.0}));
}

TEST(Optimizer, ConstantStepIsLinearInGradient) {
  const auto s = make(OptimizerKind::constant, 0.05, 3);
  const Vec th{0, 0, 0}, g{0.3, -1.2, 4.0}, g2{0.6, -2.4, 8.0};
  const Vec a = step(s, th, g).theta, b = step(s, th, g2).theta;
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(b[i], 2 * a[i]);
}

TEST(Optimizer, AdamFirstStepIsBiasCorrected) {
  const auto out = step(make(OptimizerKind::adam, 0.1, 1), Vec{0.0}, Vec{2.0});
  EXPECT_NEAR(out.theta[0], 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_NEAR(out.state.m[0], 0.2, 1e-15);
  EXPECT_NEAR(out.state.v[0], 0.004, 1e-15);
}

TEST(Optimizer, AdamFirstStepMovesByStepSizeTimesSign) {
  const auto out = step(make(OptimizerKind::adam, 0.01, 3), Vec{0, 0, 0}, Vec{5.0, -300.0, 1e-3});
  EXPECT_NEAR(out.theta[0], 0.01, 1e-9);
  EXPECT_NEAR(out.theta[1], -0.01, 1e-9);
  EXPECT_NEAR(out.theta[2], 0.01, 1e-6);
}

TEST(Optimizer, AdamSecondStepMatchesHandComputation) {
  const auto s1 = step(make(OptimizerKind::adam, 0.1, 1), Vec{0.0}, Vec{1.0});
  const auto s2 = step(s1.state, s1.theta, Vec{-1.0});
  const double m = 0.9 * 0.1 + 0.1 * -1.0;
  const double v = 0.999 * 0.001 + 0.001 * 1.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(s2.theta[0], s1.theta[0] + 0.1 * mh / (std::sqrt(vh) + 1e-8), 1e-14);
}

TEST(Optimizer, StepIsPure) {
  const auto s = make(OptimizerKind::adam, 0.02, 2);
  const auto a = step(s, Vec{1, 2}, Vec{0.5, -0.5});
  const auto b = step(s, Vec{1, 2}, Vec{0.5, -0.5});
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.state.m, b.state.m);
  EXPECT_EQ(s.t, 0u);
  EXPECT_EQ(s.m, Vec({0, 0}));
}

TEST(Optimizer, NonFiniteGradientNamesTheStep) {
  const auto s = make(OptimizerKind::adam, 0.01, 2);
  try {
    step(s, Vec{0, 0}, Vec{1.0, NAN});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

TEST(Optimizer, ClippingRescalesLargeGradients) {
  const OptimizerState s(OptimizerConfig{OptimizerKind::constant, 1.0, 1.0}, 2);
  const auto out = step(s, Vec{0, 0}, Vec{3.0, 4.0});
  EXPECT_NEAR(out.theta[0], 0.6, 1e-15);
  EXPECT_NEAR(out.theta[1], 0.8, 1e-15);
  EXPECT_EQ(step(s, Vec{0, 0}, Vec{0.3, 0.4}).theta, Vec({0.3, 0.4}));
}

TEST(Optimizer, ConfigValidation) {
  EXPECT_THROW(OptimizerState(OptimizerConfig{OptimizerKind::adam, 0.0, {}}, 1), Error);
  EXPECT_THROW(OptimizerState(OptimizerConfig{OptimizerKind::adam, 0.1, -1.0}, 1), Error);
  EXPECT_EQ(optimizer_kind_from_string("constant"), OptimizerKind::constant);
  EXPECT_THROW(optimizer_kind_from_string("sgd"), Error);
  EXPECT_THROW(step(make(OptimizerKind::adam, 0.1, 2), Vec{0, 0}, Vec{0}), Error);
}

TEST(TheorySteps, ConstantStepBranches) {
  EXPECT_DOUBLE_EQ(theory_constant_step(1, 1, 1, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(theory_constant_step(1, 2, 1, 1, 0), std::min(0.5, std::cbrt(0.5)));
  EXPECT_DOUBLE_EQ(theory_constant_step(1, 1, 1, 1, 4), 0.25);
  const double a = theory_constant_step(1, 0.001, 100, 1, 0);
  const double b = theory_constant_step(1, 0.001, 100, 4, 0);
  EXPECT_NEAR(b / a, std::cbrt(4.0), 1e-12);
  EXPECT_THROW(theory_constant_step(0, 1, 1, 1, 1), Error);
  EXPECT_THROW(theory_constant_step(1, 1, 1, 1, -1), Error);
}

TEST(TheorySteps, EpsilonStep) {
  EXPECT_DOUBLE_EQ(theory_epsilon_step(1, 1, 1, 4, 1), 1.0);
  EXPECT_DOUBLE_EQ(theory_epsilon_step(1, 1, 1, 4, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(theory_epsilon_step(1, 1, 1, 8, 1), 2.0);
  EXPECT_THROW(theory_epsilon_step(1, 1, 1, 4, 0), Error);
}
