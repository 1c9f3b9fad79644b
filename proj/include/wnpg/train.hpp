// Learning loops (PGPE and GPOMDP), deterministic deployment and the
// exploration-variance sweep.
//
// Row k (k = 1..K) of a RunRecord describes iteration k: J_hat is the batch
// mean of discounted returns collected at theta_{k-1}, the update then
// produces theta_k, and J_det (when present) is the deployed return of
// theta_k. Deployment at iteration k uses seed_for(eval, k, 0) as its base
// seed.

#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wnpg/core.hpp"
#include "wnpg/env.hpp"
#include "wnpg/estimator.hpp"
#include "wnpg/optimize.hpp"
#include "wnpg/parallel.hpp"
#include "wnpg/policy.hpp"
#include "wnpg/seed.hpp"

namespace wnpg {

struct ExperimentConfig {
  EnvSpec env = LqrSpec{};
  PolicyKind policy = PolicyKind::linear;
  Algo algo = Algo::pgpe;
  NoiseKind noise_kind = NoiseKind::gaussian;
  double sigma = 0.1;
  std::size_t iterations = 100;
  std::size_t batch_size = 100;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::size_t eval_every = 10;
  /// Defaults to 100 (LQR) or 1 (bandit) when unset.
  std::optional<std::size_t> eval_episodes;
  std::optional<Vec> theta_init;
  double divergence_threshold = -1e9;
  std::vector<double> sigma_sq_values;
  std::size_t repeat_seeds = 1;
  bool record_wallclock = false;

  PolicyArch arch() const { return {policy, state_dim(env), action_dim(env)}; }

  std::size_t resolved_eval_episodes() const {
    if (eval_episodes) return *eval_episodes;
    return std::holds_alternative<BanditSpec>(env) ? 1 : 100;
  }

  /// NoiseSpec sized for the exploration space of the chosen algorithm.
  NoiseSpec noise() const {
    const std::size_t dim = algo == Algo::pgpe ? arch().param_count() : arch().action_dim;
    return {noise_kind, dim, sigma};
  }

  void validate() const {
    std::visit([](const auto& e) { e.validate(); }, env);
    require(iterations >= 1, "iterations: must be >= 1");
    require(batch_size >= 1, "batch_size: must be >= 1");
    require(std::isfinite(sigma) && sigma > 0.0, "noise.sigma: must be > 0 for training");
    require(noise_kind == NoiseKind::gaussian, "noise.kind: training requires gaussian noise");
    require(eval_every >= 1, "eval_every: must be >= 1");
    require(resolved_eval_episodes() >= 1, "eval_episodes: must be >= 1");
    require(repeat_seeds >= 1, "repeat_seeds: must be >= 1");
    optimizer.validate();
    for (double s2 : sigma_sq_values) require(std::isfinite(s2) && s2 > 0.0, "sigma_sq_values: entries must be > 0");
    if (theta_init) {
      require_dim(theta_init->size(), arch().param_count(), "theta_init");
      require(all_finite(*theta_init), "theta_init: entries must be finite");
    }
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------- deployment ----

struct DeployResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t episodes = 0;
  /// Set when episodes == 1: the standard error is then 0 by convention.
  bool single_episode = false;
};

/// Rolls out mu_theta with the noise switched off. Episode j draws its
/// initial state from seed_for(eval, 0, j) of SeedPlan{seed}.
inline DeployResult deploy_deterministic(const PolicyParams& params, const EnvSpec& env, std::size_t episodes,
                                         std::uint64_t seed, std::size_t workers = 1) {
  require(episodes >= 1, "deploy_deterministic: episodes must be >= 1");
  const SeedPlan plan{seed};
  const double gamma = discount(env);
  const long T = horizon(env);
  Vec returns(episodes, 0.0);
  const Actor actor = params;
  parallel_for(episodes, workers, [&](std::size_t j) {
    returns[j] = discounted_return(rollout(env, actor, T, plan.seed_for(Purpose::eval, 0, j)), gamma);
  });
  DeployResult r;
  r.episodes = episodes;
  double sum = 0.0;
  for (double x : returns) sum += x;
  r.mean = sum / static_cast<double>(episodes);
  if (episodes == 1) {
    r.single_episode = true;
    return r;
  }
  double ss = 0.0;
  for (double x : returns) ss += (x - r.mean) * (x - r.mean);
  r.std_error = std::sqrt(ss / static_cast<double>(episodes - 1) / static_cast<double>(episodes));
  return r;
}

// ------------------------------------------------------------ training ----

struct RunRow {
  std::size_t k = 0;
  double J_hat = 0.0;
  std::optional<double> J_det;
  double grad_norm = 0.0;
  double zeta = 0.0;
  std::optional<double> wallclock_ms;
};

enum class RunStatus { ok, diverged };

inline std::string_view to_string(RunStatus s) { return s == RunStatus::ok ? "ok" : "diverged"; }

struct RunRecord {
  std::vector<RunRow> rows;
  PolicyParams theta_final;
  RunStatus status = RunStatus::ok;
  std::string status_detail;
  /// Base seed of the deployment that produced the last row's J_det.
  std::uint64_t final_eval_seed = 0;

  bool flagged() const { return status != RunStatus::ok; }
};

inline PolicyParams initial_policy_params(const ExperimentConfig& cfg) {
  if (cfg.theta_init) return {cfg.arch(), *cfg.theta_init};
  Rng rng(SeedPlan{cfg.seed}.seed_for(Purpose::init, 0, 0));
  return initial_params(cfg.arch(), rng);
}

namespace detail {

struct BatchOutcome {
  GradientEstimate estimate;
  double j_hat = 0.0;
};

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline BatchOutcome pgpe_batch(const ExperimentConfig& cfg, const PolicyParams& theta, const SeedPlan& plan,
                               std::uint64_t k, std::size_t workers) {
  const PbHyperpolicy hyper(theta, cfg.noise());
  const PbBatch batch = collect_pb_batch(cfg.env, hyper, cfg.batch_size, plan, k, workers);
  Vec rets;
  rets.reserve(batch.samples.size());
  for (const auto& s : batch.samples) rets.push_back(s.ret);
  const double j_hat = mean_of(rets);
  if (!(j_hat >= cfg.divergence_threshold)) return {{}, j_hat};
  return {pgpe_estimate(batch.samples, hyper), j_hat};
}

inline BatchOutcome gpomdp_batch(const ExperimentConfig& cfg, const PolicyParams& theta, const SeedPlan& plan,
                                 std::uint64_t k, std::size_t workers) {
  const AbPolicy policy(theta, cfg.noise());
  const AbBatch batch = collect_ab_batch(cfg.env, policy, cfg.batch_size, plan, k, workers);
  const double j_hat = mean_of(batch.returns);
  if (!(j_hat >= cfg.divergence_threshold)) return {{}, j_hat};
  return {gpomdp_estimate(batch.trajectories, policy, discount(cfg.env)), j_hat};
}

inline RunRecord run_loop(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  const SeedPlan plan{cfg.seed};
  const std::size_t K = cfg.iterations;
  const std::size_t episodes = cfg.resolved_eval_episodes();
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  PolicyParams theta = initial_policy_params(cfg);
  OptimizerState opt(cfg.optimizer, theta.theta.size());
  RunRecord rec;
  rec.rows.reserve(K);

  for (std::size_t k = 1; k <= K; ++k) {
    const BatchOutcome b = cfg.algo == Algo::pgpe ? pgpe_batch(cfg, theta, plan, k, workers)
                                                  : gpomdp_batch(cfg, theta, plan, k, workers);
    RunRow row;
    row.k = k;
    row.J_hat = b.j_hat;
    row.zeta = cfg.optimizer.step_size;

    if (!(b.j_hat >= cfg.divergence_threshold)) {
      // Flagged tail: deploy the last parameter so the row still carries J_det.
      rec.status = RunStatus::diverged;
      rec.status_detail = "iteration " + std::to_string(k) + ": J_hat below divergence threshold";
      rec.final_eval_seed = plan.seed_for(Purpose::eval, k, 0);
      row.J_det = deploy_deterministic(theta, cfg.env, episodes, rec.final_eval_seed, workers).mean;
      if (cfg.record_wallclock) {
        row.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      }
      rec.rows.push_back(row);
      break;
    }

    row.grad_norm = norm(b.estimate.grad);
    StepOutput next;
    try {
      next = step(opt, theta.theta, b.estimate.grad);
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(k) + ": " + e.what());
    }
    if (!all_finite(next.theta)) {
      rec.status = RunStatus::diverged;
      rec.status_detail = "iteration " + std::to_string(k) + ": non-finite parameters";
      rec.rows.push_back(row);
      break;
    }
    theta = PolicyParams(theta.arch, std::move(next.theta));
    opt = std::move(next.state);

    if (k % cfg.eval_every == 0 || k == K) {
      rec.final_eval_seed = plan.seed_for(Purpose::eval, k, 0);
      row.J_det = deploy_deterministic(theta, cfg.env, episodes, rec.final_eval_seed, workers).mean;
    }
    if (cfg.record_wallclock) {
      row.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }
    rec.rows.push_back(row);
  }
  rec.theta_final = std::move(theta);
  return rec;
}

}  // namespace detail

inline RunRecord run_pgpe(ExperimentConfig cfg, std::size_t workers = 1) {
  require(cfg.algo == Algo::pgpe, "run_pgpe: config algo must be pgpe");
  return detail::run_loop(cfg, workers);
}

inline RunRecord run_gpomdp(ExperimentConfig cfg, std::size_t workers = 1) {
  require(cfg.algo == Algo::gpomdp, "run_gpomdp: config algo must be gpomdp");
  return detail::run_loop(cfg, workers);
}

inline RunRecord run(const ExperimentConfig& cfg, std::size_t workers = 1) {
  return cfg.algo == Algo::pgpe ? run_pgpe(cfg, workers) : run_gpomdp(cfg, workers);
}

// --------------------------------------------------------------- sweep ----

struct SweepRow {
  double sigma_sq = 0.0;
  std::uint64_t seed = 0;
  double J_hat_final = std::nan("");
  double J_det_final = std::nan("");
  std::string status;  // "ok", "diverged" or "error: ..."
};

struct SweepAggregate {
  double sigma_sq = 0.0;
  std::size_t runs_ok = 0;
  double J_hat_mean = std::nan("");
  double J_hat_halfwidth = std::nan("");
  double J_det_mean = std::nan("");
  double J_det_halfwidth = std::nan("");
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
};

/// Mean and 95% normal-approximation halfwidth (1.96 standard errors).
inline std::pair<double, double> mean_halfwidth(std::span<const double> xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  const double m = detail::mean_of(xs);
  if (xs.size() == 1) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return {m, 1.96 * std::sqrt(ss / (n - 1.0) / n)};
}

/// Seed of repetition r: seed_for(sweep, r, 0) of the base master seed. The
/// same seeds are reused for every sigma value.
inline std::uint64_t sweep_seed(const ExperimentConfig& base, std::size_t r) {
  return SeedPlan{base.seed}.seed_for(Purpose::sweep, r, 0);
}

inline SweepResult variance_sweep(const ExperimentConfig& base, std::size_t workers = 1) {
  require(!base.sigma_sq_values.empty(), "variance_sweep: sigma_sq_values must be non-empty");
  require(base.repeat_seeds >= 1, "variance_sweep: repeat_seeds must be >= 1");
  SweepResult out;
  for (double s2 : base.sigma_sq_values) {
    Vec hats, dets;
    for (std::size_t r = 0; r < base.repeat_seeds; ++r) {
      ExperimentConfig cfg = base;
      cfg.sigma = std::sqrt(s2);
      cfg.seed = sweep_seed(base, r);
      SweepRow row;
      row.sigma_sq = s2;
      row.seed = cfg.seed;
      try {
        const RunRecord rec = run(cfg, workers);
        row.status = std::string(to_string(rec.status));
        row.J_hat_final = rec.rows.back().J_hat;
        if (rec.rows.back().J_det) row.J_det_final = *rec.rows.back().J_det;
        if (!rec.flagged()) {
          hats.push_back(row.J_hat_final);
          dets.push_back(row.J_det_final);
        }
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      out.rows.push_back(std::move(row));
    }
    SweepAggregate agg;
    agg.sigma_sq = s2;
    agg.runs_ok = hats.size();
    std::tie(agg.J_hat_mean, agg.J_hat_halfwidth) = mean_halfwidth(hats);
    std::tie(agg.J_det_mean, agg.J_det_halfwidth) = mean_halfwidth(dets);
    out.aggregates.push_back(agg);
  }
  return out;
}

}  // namespace wnpg
