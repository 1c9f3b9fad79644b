// Fast invariant suite behind `wnpg check`.
//
// Groups: noise (white-noise moments), score (analytic scores against
// finite differences of log-densities), estimator (unbiasedness of GPOMDP
// and PGPE on the bandit against its closed-form smoothed gradient),
// deployment (gap bound on a grid, exact tightness instance) and
// determinism (seeded runs across worker counts).

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wnpg/env.hpp"
#include "wnpg/estimator.hpp"
#include "wnpg/noise.hpp"
#include "wnpg/report.hpp"
#include "wnpg/theory.hpp"
#include "wnpg/train.hpp"

namespace wnpg {

struct CheckResult {
  std::string group;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct CheckOptions {
  /// Run only checks whose group or name contains this string.
  std::string filter;
  /// Test hook: flips the sign of the GPOMDP score (mutation canary).
  bool corrupt_gpomdp_score = false;
};

namespace checks {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// d/dtheta_i of E f(theta + eps), eps ~ N(0, sigma^2 I), for the bandit:
/// horizon_factor / d * (L P(rising edge) - L/2 P(falling edge)).
inline Vec bandit_gaussian_smoothed_gradient(const BanditSpec& spec, std::span<const double> theta, double sigma) {
  const double L = spec.lipschitz;
  const double scale = horizon_factor(spec.gamma, spec.horizon) / static_cast<double>(spec.dim);
  Vec g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    const double rising = normal_cdf(-t / sigma) - normal_cdf((-1.0 / L - t) / sigma);
    const double falling = normal_cdf((2.0 / L - t) / sigma) - normal_cdf(-t / sigma);
    g[i] = scale * (L * rising - 0.5 * L * falling);
  }
  return g;
}

inline std::string fmt(double x) { return fmt_short(x); }

inline CheckResult named(std::string group, std::string name) {
  CheckResult c;
  c.group = std::move(group);
  c.name = std::move(name);
  return c;
}

inline CheckResult noise_moments(NoiseKind kind, std::size_t dim, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  const NoiseSpec ns{kind, dim, sigma};
  const MomentReport r = empirical_moment_check(ns, 1000000, rng);
  const double ratio = r.mean_sq_norm / r.bound;
  CheckResult c = named("noise", std::string(to_string(kind)) + "_moments");
  c.pass = r.within_tolerance(sigma, dim) && ratio >= 0.99 && ratio <= 1.01;
  c.detail = "E||eps||^2/(d sigma^2)=" + fmt(ratio) + " ||mean||=" + fmt(r.mean_norm);
  return c;
}

inline CheckResult score_second_moment() {
  Rng rng(SeedPlan{1}.seed_for(Purpose::check, 0, 0));
  const NoiseSpec ns{NoiseKind::gaussian, 3, 2.0};
  double acc = 0.0;
  const std::size_t n = 1000000;
  for (std::size_t i = 0; i < n; ++i) acc += squared_norm(score_gradient(ns, sample(ns, rng)));
  const double mc = acc / static_cast<double>(n);
  const double exact = score_second_moment_analytic(ns);
  CheckResult c = named("score", "gaussian_second_moment");
  c.pass = std::abs(mc / exact - 1.0) <= 0.02;
  c.detail = "MC=" + fmt(mc) + " analytic=" + fmt(exact);
  return c;
}

/// Max relative error between an analytic gradient and central differences.
inline double fd_mismatch(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                          std::span<const double> analytic) {
  const double h = 1e-5;
  Vec p(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i])));
  }
  return worst;
}

inline CheckResult score_vs_fd(PolicyKind kind) {
  Rng rng(SeedPlan{2}.seed_for(Purpose::check, kind == PolicyKind::linear ? 1 : 2, 0));
  const PolicyArch arch{kind, 2, 2};
  PolicyParams p = initial_params(arch, rng);
  if (kind == PolicyKind::linear) {
    std::normal_distribution<double> z(0.0, 0.5);
    for (double& v : p.theta) v = z(rng);
  }
  const AbPolicy pol(p, NoiseSpec{NoiseKind::gaussian, 2, 0.7});
  const Vec s = {0.3, -1.2};
  const AbAction a = ab_sample_action(pol, s, rng);
  const Vec g = ab_log_policy_gradient(pol, s, a.action);
  const double ab_err = fd_mismatch(
      [&](std::span<const double> th) {
        return ab_log_density(AbPolicy(PolicyParams(arch, Vec(th.begin(), th.end())), pol.noise), s, a.action);
      },
      p.theta, g);

  const PbHyperpolicy hyper(p, NoiseSpec{NoiseKind::gaussian, p.theta.size(), 0.4});
  const PbSample drawn = pb_sample_params(hyper, rng);
  const Vec gp = pb_log_hyperpolicy_gradient(hyper, drawn.params);
  const double pb_err = fd_mismatch(
      [&](std::span<const double> th) {
        return pb_log_density(PbHyperpolicy(PolicyParams(arch, Vec(th.begin(), th.end())), hyper.noise),
                              drawn.params);
      },
      p.theta, gp);
  CheckResult c = named("score", std::string(to_string(kind)) + "_scores_vs_fd");
  c.pass = ab_err < 1e-5 && pb_err < 1e-5;
  c.detail = "AB rel err=" + fmt(ab_err) + " PB rel err=" + fmt(pb_err);
  return c;
}

inline CheckResult estimator_unbiased(Algo algo, bool corrupt) {
  const BanditSpec spec{};
  const EnvSpec env = spec;
  const PolicyParams theta({PolicyKind::linear, 1, 1}, {-0.5});
  const double sigma = 0.3;
  const std::size_t n = 20000;
  const SeedPlan plan{SeedPlan{3}.seed_for(Purpose::check, static_cast<std::uint64_t>(algo), 0)};
  GradientEstimate est;
  if (algo == Algo::gpomdp) {
    const AbPolicy pol(theta, NoiseSpec{NoiseKind::gaussian, 1, sigma});
    const AbBatch batch = collect_ab_batch(env, pol, n, plan, 0);
    est = detail::gpomdp_estimate_impl(batch.trajectories, pol, spec.gamma, corrupt ? -1.0 : 1.0);
  } else {
    est = sample_gradient_estimate(env, algo, theta, NoiseSpec{NoiseKind::gaussian, 1, sigma}, n, plan, 0);
  }
  const Vec oracle = bandit_gaussian_smoothed_gradient(spec, theta.theta, sigma);
  Vec diff = est.grad;
  axpy(-1.0, oracle, diff);
  const double se = std::sqrt(est.per_sample_trace_variance);
  CheckResult c = named("estimator", std::string(to_string(algo)) + "_unbiased_bandit");
  c.pass = norm(diff) <= 3.0 * se;
  c.detail = "estimate=" + fmt(est.grad[0]) + " oracle=" + fmt(oracle[0]) + " 3SE=" + fmt(3.0 * se);
  return c;
}

inline CheckResult deployment_grid() {
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (double L : {1.0, 2.0}) {
    const BanditSpec spec{1, L, 1, 1.0, std::nullopt};
    for (double sigma : {0.05, 0.1, 0.2}) {
      if (std::sqrt(3.0) * sigma > 1.0 / L) continue;
      const double bound = deployment_gap_bound(L, 1.0, sigma).uniform;
      for (int i = 0; i <= 200; ++i) {
        const Vec th = {-2.0 + 4.0 * i / 200.0};
        const double gap = std::abs(bandit_jd_analytic(spec, th) - bandit_jp_analytic(spec, th, sigma));
        worst_ratio = std::max(worst_ratio, gap / bound);
        if (gap > bound) ++violations;
      }
    }
  }
  CheckResult c = named("deployment", "gap_bound_grid");
  c.pass = violations == 0;
  c.detail = "violations=" + std::to_string(violations) + " max gap/bound=" + fmt(worst_ratio);
  return c;
}

inline CheckResult deployment_tightness() {
  const long double L = 1, sigma = 0.1L;
  const long double arg = golden_section_maximize<long double>(
      [&](long double x) { return bandit_smoothed_f<long double>(L, x, sigma); }, -0.5L, 0.5L, 1e-15L);
  const long double target = sigma / std::sqrt(3.0L);
  const BanditSpec spec{};
  const double gap = bandit_jd_analytic(spec, Vec{0.0}) - bandit_jd_analytic(spec, Vec{0.1 / std::sqrt(3.0)});
  const double want_gap = 0.1 / (2 * std::sqrt(3.0));
  CheckResult c = named("deployment", "tightness_instance");
  c.pass = std::abs(arg - target) <= 1e-9L && std::abs(gap - want_gap) <= 1e-12;
  c.detail = "argmax=" + fmt(static_cast<double>(arg)) + " gap=" + fmt(gap);
  return c;
}

inline ExperimentConfig smoke_config() {
  ExperimentConfig cfg;
  cfg.env = BanditSpec{};
  cfg.algo = Algo::pgpe;
  cfg.sigma = 0.1;
  cfg.iterations = 20;
  cfg.batch_size = 16;
  cfg.optimizer = {OptimizerKind::constant, 0.5, std::nullopt};
  cfg.seed = 7;
  cfg.eval_every = 5;
  cfg.theta_init = Vec{-0.5};
  return cfg;
}

inline CheckResult determinism(Algo algo) {
  ExperimentConfig cfg = smoke_config();
  cfg.algo = algo;
  if (algo == Algo::gpomdp) {
    cfg.env = LqrSpec{};
    cfg.theta_init.reset();
    cfg.sigma = 0.1;
    cfg.optimizer = {OptimizerKind::adam, 0.01, std::nullopt};
    cfg.eval_episodes = 10;
  }
  const RunRecord a = run(cfg, 1);
  const RunRecord b = run(cfg, 1);
  const RunRecord c3 = run(cfg, 3);
  const bool same = record_csv(a) == record_csv(b) && record_csv(a) == record_csv(c3) &&
                    encode_f64(a.theta_final.theta) == encode_f64(b.theta_final.theta) &&
                    encode_f64(a.theta_final.theta) == encode_f64(c3.theta_final.theta);
  CheckResult c = named("determinism", std::string(to_string(algo)) + "_workers_1_vs_3");
  c.pass = same;
  c.detail = same ? "record.csv and theta identical" : "outputs differ";
  return c;
}

}  // namespace checks

/// Runs the selected checks, reporting each result through `sink` as soon
/// as it is available.
inline std::vector<CheckResult> run_checks(const CheckOptions& opt,
                                           const std::function<void(const CheckResult&)>& sink = {}) {
  struct Entry {
    std::string group, name;
    std::function<CheckResult()> fn;
  };
  const std::vector<Entry> all = {
      {"noise", "gaussian_moments",
       [] { return checks::noise_moments(NoiseKind::gaussian, 2, 1.0, SeedPlan{4}.seed_for(Purpose::check, 0, 0)); }},
      {"noise", "uniform_moments",
       [] { return checks::noise_moments(NoiseKind::uniform, 1, 1.0, SeedPlan{4}.seed_for(Purpose::check, 1, 0)); }},
      {"score", "gaussian_second_moment", [] { return checks::score_second_moment(); }},
      {"score", "linear_scores_vs_fd", [] { return checks::score_vs_fd(PolicyKind::linear); }},
      {"score", "mlp_scores_vs_fd", [] { return checks::score_vs_fd(PolicyKind::mlp); }},
      {"estimator", "gpomdp_unbiased_bandit",
       [&] { return checks::estimator_unbiased(Algo::gpomdp, opt.corrupt_gpomdp_score); }},
      {"estimator", "pgpe_unbiased_bandit", [] { return checks::estimator_unbiased(Algo::pgpe, false); }},
      {"deployment", "gap_bound_grid", [] { return checks::deployment_grid(); }},
      {"deployment", "tightness_instance", [] { return checks::deployment_tightness(); }},
      {"determinism", "pgpe_workers_1_vs_3", [] { return checks::determinism(Algo::pgpe); }},
      {"determinism", "gpomdp_workers_1_vs_3", [] { return checks::determinism(Algo::gpomdp); }},
  };
  std::vector<CheckResult> out;
  for (const Entry& e : all) {
    if (!opt.filter.empty() && e.group.find(opt.filter) == std::string::npos &&
        e.name.find(opt.filter) == std::string::npos) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = e.fn();
    } catch (const std::exception& ex) {
      r = checks::named(e.group, e.name);
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wnpg
