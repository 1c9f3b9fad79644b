#include <gtest/gtest.h>

#include <cmath>

#include "wnpg/theory.hpp"

using namespace wnpg;

namespace {

RegularityConstants ones(double gamma = 0.5) {
  RegularityConstants rc;
  rc.L_p = rc.L_r = rc.L_2p = rc.L_2r = rc.L_mu = rc.L_2mu = rc.R_max = 1.0;
  rc.gamma = gamma;
  return rc;
}

struct Exponents {
  const char* algo;
  SigmaMode mode;
  bool smooth;
  double eps, h, d, sigma;
};

}  // namespace

TEST(Lipschitz, Golden) {
  const auto rc = ones();
  const auto lc = lipschitz_constants(rc);
  EXPECT_NEAR(lc.L, 4.0, 1e-12);
  EXPECT_NEAR(lc.L_J, 4.0, 1e-12);
}

TEST(Lipschitz, RewardOnlySensitivity) {
  auto rc = ones(0.8);
  rc.L_p = 0.0;
  rc.T = 5;
  EXPECT_NEAR(lipschitz_constants(rc).L, (1 - std::pow(0.8, 5)) / 0.2, 1e-12);
}

TEST(Lipschitz, ScalesWithPolicyLipschitz) {
  auto rc = ones();
  rc.L_mu = 3.0;
  const auto lc = lipschitz_constants(rc);
  EXPECT_NEAR(lc.L_J, 3.0 * lc.L, 1e-12);
}

TEST(Lipschitz, PerStepClosureCapsAtHorizon) {
  auto rc = ones();
  rc.T = 3;
  const auto lc = lipschitz_constants(rc);
  EXPECT_EQ(lc.L_t(3), 0.0);
  EXPECT_EQ(lc.L_t(10), 0.0);
  EXPECT_NEAR(lc.L_t(0), (0.5 - 0.125) / 0.5 + 1.0, 1e-12);
  rc.T.reset();
  EXPECT_NEAR(lipschitz_constants(rc).L_t(0), 2.0, 1e-12);
  EXPECT_THROW(lc.L_t(-1), Error);
}

TEST(Lipschitz, TableRenderingDropsTheLeadingDiscount) {
  const auto rc = ones();
  EXPECT_NEAR(lipschitz_constants(rc, Rendering::table1).L, 1.0 / 0.25 + 1.0 / 0.5, 1e-12);
}

TEST(Lipschitz, RejectsUndiscounted) { EXPECT_THROW(lipschitz_constants(ones(1.0)), Error); }

TEST(Smoothness, Golden) {
  EXPECT_NEAR(smoothness_L2(ones()), 14.0, 1e-12);
  auto rc = ones();
  rc.L_p = rc.L_2p = rc.L_2mu = 0.0;
  EXPECT_EQ(smoothness_L2(rc), 0.0);
  // table1: 2/0.125 + 3/0.25 + 1/0.5
  EXPECT_NEAR(smoothness_L2(ones(), Rendering::table1), 16.0 + 12.0 + 2.0, 1e-12);
}

TEST(Smoothness, MonotoneInEveryInput) {
  const double base = smoothness_L2(ones(0.6));
  for (double RegularityConstants::*f : {&RegularityConstants::L_p, &RegularityConstants::L_r,
                                         &RegularityConstants::L_2p, &RegularityConstants::L_2r,
                                         &RegularityConstants::L_mu, &RegularityConstants::L_2mu,
                                         &RegularityConstants::R_max, &RegularityConstants::gamma}) {
    auto rc = ones(0.6);
    rc.*f += 0.1;
    EXPECT_GE(smoothness_L2(rc), base);
  }
}

TEST(Smoothness, ObjectiveBoundPicksTheSmallerBranch) {
  const auto rc = ones();
  const auto b = objective_smoothness(rc, Exploration::pb, 1.0);
  EXPECT_NEAR(b.value, 8.0, 1e-12);
  EXPECT_EQ(b.branch, SmoothnessBranch::noise);
  EXPECT_LT(objective_smoothness(rc, Exploration::pb, 1e6).value, 1e-9);

  auto ab = rc;
  ab.d_action = 1;
  const auto gated = objective_smoothness(ab, Exploration::ab, 1.0);
  EXPECT_FALSE(gated.noise_branch.has_value());
  EXPECT_EQ(gated.branch, SmoothnessBranch::l2);
  EXPECT_NEAR(gated.value, 14.0, 1e-12);
  EXPECT_TRUE(objective_smoothness(ab, Exploration::ab, 0.99).noise_branch.has_value());
}

TEST(Smoothness, PbNoiseBranchScalesInverselyWithVariance) {
  const auto rc = ones();
  const double a = *noise_smoothness(rc, Exploration::pb, 0.3);
  const double b = *noise_smoothness(rc, Exploration::pb, 0.6);
  EXPECT_NEAR(a / b, 4.0, 1e-12);
}

TEST(Variance, Golden) {
  auto rc = ones();
  rc.d_theta = 2;
  EXPECT_NEAR(variance_bounds(rc, Exploration::pb, 1.0), 8.0, 1e-12);
  auto ab = ones();
  ab.L_mu = 0.0;
  EXPECT_EQ(variance_bounds(ab, Exploration::ab, 1.0), 0.0);
  EXPECT_NEAR(variance_bounds(rc, Exploration::pb, 0.5) / variance_bounds(rc, Exploration::pb, 1.0), 4.0, 1e-12);
}

TEST(Variance, RewardBoundPowerDependsOnRendering) {
  auto rc = ones();
  rc.R_max = 3.0;
  EXPECT_NEAR(variance_bounds(rc, Exploration::pb, 1.0) / variance_bounds(rc, Exploration::pb, 1.0, Rendering::table1),
              3.0, 1e-12);
}

TEST(DeploymentGap, Golden) {
  const auto g = deployment_gap_bound(4.0, 4.0, 0.1);
  EXPECT_NEAR(g.uniform, 0.8, 1e-12);
  EXPECT_NEAR(g.suboptimality, 1.6, 1e-12);
  EXPECT_NEAR(g.tightness_floor, 0.224, 1e-12);
  const auto z = deployment_gap_bound(4.0, 4.0, 0.0);
  EXPECT_EQ(z.uniform, 0.0);
  EXPECT_EQ(z.suboptimality, 0.0);
  EXPECT_EQ(z.tightness_floor, 0.0);
  const auto h = deployment_gap_bound(1.7, 3.0, 0.37);
  EXPECT_NEAR(h.tightness_floor / h.uniform, 0.28, 1e-15);
}

TEST(SigmaAdaptive, Golden) {
  EXPECT_NEAR(sigma_adaptive(0.6, 1.0, 1.0), 0.1, 1e-15);
  EXPECT_NEAR(sigma_adaptive(0.3, 1.0, 1.0), 0.05, 1e-15);
  EXPECT_NEAR(sigma_adaptive(0.6, 1.0, 4.0), 0.05, 1e-15);
  EXPECT_THROW(sigma_adaptive(0.0, 1.0, 1.0), Error);
}

TEST(SigmaAdaptive, GapContributesHalfTheTarget) {
  for (double eps : {0.01, 0.3, 2.0}) {
    const double L = 2.5, d = 7.0;
    EXPECT_NEAR(3.0 * deployment_gap_bound(L, d, sigma_adaptive(eps, L, d)).uniform, eps / 2, 1e-12 * eps);
  }
}

TEST(SampleComplexity, Golden) {
  const WgdParams w{1.0, 0.0, ObjectiveTag::deterministic};
  EXPECT_NEAR(sample_complexity(w, 1, 1, 0.1, 1.0), 16000.0 * std::log(10.0), 1e-8);
  EXPECT_NEAR(sample_complexity(w, 1, 1, 0.1, 1.0), 36841.361, 1e-3);
  EXPECT_EQ(sample_complexity({1.0, 2.0, ObjectiveTag::deterministic}, 1, 1, 0.1, 1.5), 0.0);
}

TEST(SampleComplexity, CubicInverseEpsilonUpToTheLog) {
  const WgdParams w{1.0, 0.0, ObjectiveTag::deterministic};
  const double a = sample_complexity(w, 2, 3, 0.01, 1.0), b = sample_complexity(w, 2, 3, 0.02, 1.0);
  EXPECT_NEAR(a / b, 8.0 * std::log(100.0) / std::log(50.0), 1e-9);
}

TEST(ConvergenceCurve, Golden) {
  const WgdParams w{1.0, 0.0, ObjectiveTag::deterministic};
  const auto c = convergence_curve(w, 1, 1, 1, 1, 200, 1.0);
  EXPECT_NEAR(c.bound[0], 1.5, 1e-12);
  EXPECT_NEAR(c.asymptote, 1.0, 1e-12);
  EXPECT_NEAR(c.bound.back(), 1.0, 1e-12);

  const auto flat = convergence_curve({1.0, 0.3, ObjectiveTag::deterministic}, 1, 1, 1, 0.5, 10, 0.3);
  for (double b : flat.bound) EXPECT_NEAR(b, 0.3 + std::sqrt(0.5), 1e-12);
}

TEST(ConvergenceCurve, RejectsTooLargeStepNamingTheBranch) {
  const WgdParams w{1.0, 0.0, ObjectiveTag::deterministic};
  try {
    convergence_curve(w, 2, 1, 1, 1, 5, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("1/L2"), std::string::npos);
  }
  try {
    convergence_curve(w, 1, 1, 1, 1, 5, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("gap"), std::string::npos);
  }
}

TEST(WgdTransfer, InheritedPb) {
  WgdTransferInputs in;
  in.deterministic = {1.0, 0.0, ObjectiveTag::deterministic};
  in.l2 = 1.0;
  in.lipschitz = 1.0;
  in.sigma = 0.1;
  in.dim = 1.0;
  const auto w = wgd_transfer(WgdTransferMode::inherited_pb, in);
  EXPECT_EQ(w.alpha, 1.0);
  EXPECT_NEAR(w.beta, 0.2, 1e-15);
  EXPECT_EQ(w.objective, ObjectiveTag::parameter_based);
}

TEST(WgdTransfer, Fisher) {
  WgdTransferInputs in;
  in.C = 1.0;
  in.dim = 4.0;
  in.sigma = 0.5;
  in.lambda_exp = 1.0;
  in.rc = ones();
  const auto w = wgd_transfer(WgdTransferMode::fisher, in);
  EXPECT_NEAR(w.alpha, 1.0, 1e-15);
  EXPECT_EQ(w.beta, 0.0);
}

TEST(WgdTransfer, InheritedAbWithoutNoiseKeepsBeta) {
  WgdTransferInputs in;
  in.deterministic = {2.0, 0.4, ObjectiveTag::deterministic};
  in.rc = ones();
  in.lipschitz = 5.0;
  in.sigma = 0.0;
  in.dim = 3.0;
  EXPECT_EQ(wgd_transfer(WgdTransferMode::inherited_ab, in).beta, 0.4);
  in.sigma = 0.1;
  // psi for all-ones constants at gamma 0.5: 0.5/0.0625 + 2.5/0.25 + 2 = 20
  EXPECT_NEAR(inherited_ab_psi(in.rc), 20.0, 1e-12);
  EXPECT_NEAR(wgd_transfer(WgdTransferMode::inherited_ab, in).beta, 0.4 + (2 * 20 + 5) * 0.1 * std::sqrt(3.0), 1e-12);
}

TEST(RateTable, DominantExponents) {
  auto rc = ones(0.9);
  rc.d_theta = 4;
  rc.d_action = 2;
  const auto cells = rate_table(rc, RateQuery{});
  ASSERT_EQ(cells.size(), 8u);
  const Exponents expected[] = {
      {"GPOMDP", SigmaMode::fixed, false, -3, 5, 2, -4},     {"GPOMDP", SigmaMode::fixed, true, -3, 6, 1, -2},
      {"GPOMDP", SigmaMode::adaptive, false, -7, 13, 4, 0},  {"GPOMDP", SigmaMode::adaptive, true, -5, 10, 2, 0},
      {"PGPE", SigmaMode::fixed, false, -3, 4, 2, -4},       {"PGPE", SigmaMode::fixed, true, -3, 5, 1, -2},
      {"PGPE", SigmaMode::adaptive, false, -7, 12, 4, 0},    {"PGPE", SigmaMode::adaptive, true, -5, 9, 2, 0},
  };
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& c = cells[i];
    const auto& e = expected[i];
    SCOPED_TRACE(std::string(e.algo) + (e.mode == SigmaMode::fixed ? " fixed" : " adaptive") +
                 (e.smooth ? " smooth" : ""));
    EXPECT_EQ(c.algo, e.algo);
    EXPECT_EQ(c.sigma_mode, e.mode);
    EXPECT_EQ(c.smoothness, e.smooth);
    EXPECT_EQ(c.exp_eps, e.eps);
    EXPECT_EQ(c.exp_H, e.h);
    EXPECT_EQ(c.exp_d, e.d);
    EXPECT_EQ(c.exp_sigma, e.sigma);
    EXPECT_EQ(rates::log2_ratio_probe(c.expr, rates::EPS, c.point), e.eps);
    EXPECT_EQ(rates::log2_ratio_probe(c.expr, rates::H, c.point), e.h);
    EXPECT_EQ(rates::log2_ratio_probe(c.expr, rates::D, c.point), e.d);
    EXPECT_EQ(rates::log2_ratio_probe(c.expr, rates::SIGMA, c.point), e.sigma);
  }
}

TEST(RateTable, AdaptiveRowsUseTheAdaptiveSigma) {
  auto rc = ones(0.9);
  rc.d_theta = 4;
  rc.d_action = 2;
  rc.L_mu = 2.0;
  const RateQuery q;
  const auto cells = rate_table(rc, q);
  const double L = lipschitz_constants(rc).L;
  EXPECT_NEAR(cells[2].sigma, sigma_adaptive(q.epsilon, L, 2.0), 1e-15);
  EXPECT_NEAR(cells[6].sigma, sigma_adaptive(q.epsilon, 2.0 * L, 4.0), 1e-15);
  EXPECT_EQ(cells[0].sigma, q.sigma);
}

TEST(RateTable, HalvingEpsilonScalesAdaptiveCoresByTheirExponent) {
  auto rc = ones(0.7);
  rc.d_theta = 3;
  RateQuery q;
  const auto a = rate_table(rc, q);
  q.epsilon /= 2;
  const auto b = rate_table(rc, q);
  for (std::size_t i = 0; i < 8; ++i) {
    if (a[i].sigma_mode != SigmaMode::adaptive) continue;
    EXPECT_NEAR(b[i].core / a[i].core, std::pow(2.0, -a[i].exp_eps), 1e-9 * std::pow(2.0, -a[i].exp_eps));
  }
}

TEST(RateTable, FixedSmoothCellMatchesChainedFormulas) {
  auto rc = ones(0.9);
  rc.d_theta = 4;
  const RateQuery q;
  const auto cells = rate_table(rc, q);
  const auto& pgpe = cells[5];
  const double l2 = smoothness_L2(rc);
  const double v = variance_bounds(rc, Exploration::pb, q.sigma);
  EXPECT_NEAR(pgpe.nk, sample_complexity({q.alpha, q.beta, ObjectiveTag::parameter_based}, l2, v, q.epsilon, q.j_gap),
              1e-9 * pgpe.nk);
}

TEST(RateAlgebra, ProbeIsExactForPowerLaws) {
  using namespace rates;
  const Expr e = factor(Posynomial{mono(3.0, {{H, 2}}), mono(5.0, {{H, 1}})}, 3) *
                 factor(Posynomial{mono(1.0, {{EPS, -2}})}, -1);
  const Point p{10.0, 1.0, 0.1, 0.01, 1.0};
  EXPECT_EQ(e.dominant_exponent(H), 6.0);
  EXPECT_EQ(e.dominant_exponent(EPS), 2.0);
  EXPECT_EQ(log2_ratio_probe(e, H, p), 6.0);
  EXPECT_EQ(ipow(2.0, 10), 1024.0);
  EXPECT_EQ(ipow(2.0, -2), 0.25);
}
