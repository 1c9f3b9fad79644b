// Unbiased policy-gradient estimators and their diagnostics.
//
//   GPOMDP (action-based):
//     g = 1/N sum_i sum_t ( sum_{k<=t} grad log pi(a_k|s_k) ) gamma^t r_t
//   PGPE (parameter-based, one trajectory per sampled parameter):
//     g = 1/N sum_i grad log nu(theta_i) R(tau_i)
//
// No baselines. Per-sample contributions are reduced in index order so the
// estimate is bit-identical for any worker count.

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wnpg/core.hpp"
#include "wnpg/env.hpp"
#include "wnpg/parallel.hpp"
#include "wnpg/policy.hpp"
#include "wnpg/seed.hpp"

namespace wnpg {

enum class Algo { pgpe, gpomdp };

inline std::string_view to_string(Algo a) { return a == Algo::pgpe ? "pgpe" : "gpomdp"; }

inline Algo algo_from_string(std::string_view s) {
  if (s == "pgpe") return Algo::pgpe;
  if (s == "gpomdp") return Algo::gpomdp;
  throw Error("unknown algo '" + std::string(s) + "' (expected pgpe|gpomdp)");
}

struct GradientEstimate {
  Vec grad;
  std::size_t batch_size = 0;
  /// trace of the empirical covariance of per-sample contributions, over N
  double per_sample_trace_variance = 0.0;
};

inline double discounted_return(std::span<const double> rewards, double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "discounted_return: gamma must be in (0, 1]");
  double ret = 0.0, disc = 1.0;
  for (double r : rewards) {
    ret += disc * r;
    disc *= gamma;
  }
  return ret;
}

inline double discounted_return(const Trajectory& traj, double gamma) {
  return discounted_return(traj.rewards, gamma);
}

namespace detail {

inline GradientEstimate reduce_contributions(const std::vector<Vec>& contributions, std::size_t dim) {
  require(!contributions.empty(), "estimator: empty batch");
  GradientEstimate est;
  est.batch_size = contributions.size();
  est.grad.assign(dim, 0.0);
  VectorWelford w(dim);
  for (const Vec& c : contributions) {
    axpy(1.0, c, est.grad);
    w.add(c);
  }
  const double n = static_cast<double>(contributions.size());
  for (double& g : est.grad) g /= n;
  est.per_sample_trace_variance = w.trace_variance() / n;
  return est;
}

inline Vec gpomdp_contribution(const Trajectory& traj, const AbPolicy& policy, double gamma,
                               double score_sign) {
  require_dim(traj.state_dim, policy.params.arch.state_dim, "gpomdp: trajectory state dim");
  require_dim(traj.action_dim, policy.params.arch.action_dim, "gpomdp: trajectory action dim");
  const std::size_t dim = policy.params.theta.size();
  Vec running(dim, 0.0), out(dim, 0.0);
  double disc = 1.0;
  for (std::size_t t = 0; t < traj.length(); ++t) {
    axpy(score_sign, ab_log_policy_gradient(policy, traj.state(t), traj.action(t)), running);
    axpy(disc * traj.rewards[t], running, out);
    disc *= gamma;
  }
  return out;
}

/// GPOMDP with a configurable score sign; -1 is the mutation canary used by
/// the invariant suite to prove the unbiasedness check can fail.
inline GradientEstimate gpomdp_estimate_impl(std::span<const Trajectory> trajs, const AbPolicy& policy,
                                             double gamma, double score_sign) {
  require(!trajs.empty(), "gpomdp_estimate: empty batch");
  std::vector<Vec> contributions;
  contributions.reserve(trajs.size());
  for (const Trajectory& tr : trajs) contributions.push_back(gpomdp_contribution(tr, policy, gamma, score_sign));
  return reduce_contributions(contributions, policy.params.theta.size());
}

}  // namespace detail

inline GradientEstimate gpomdp_estimate(std::span<const Trajectory> trajs, const AbPolicy& policy, double gamma) {
  return detail::gpomdp_estimate_impl(trajs, policy, gamma, 1.0);
}

struct PbReturn {
  PolicyParams params;
  double ret = 0.0;
};

inline GradientEstimate pgpe_estimate(std::span<const PbReturn> samples, const PbHyperpolicy& hyper) {
  require(!samples.empty(), "pgpe_estimate: empty batch");
  std::vector<Vec> contributions;
  contributions.reserve(samples.size());
  for (const PbReturn& s : samples) {
    Vec c = pb_log_hyperpolicy_gradient(hyper, s.params);
    for (double& v : c) v *= s.ret;
    contributions.push_back(std::move(c));
  }
  return detail::reduce_contributions(contributions, hyper.mean.theta.size());
}

/// Objective evaluated at (theta, seed). The same seed is used for both
/// sides of each central difference (common random numbers).
using SeededObjective = std::function<double(std::span<const double>, std::uint64_t)>;

inline Vec finite_difference_gradient(const SeededObjective& objective, std::span<const double> theta, double h,
                                      std::uint64_t seed) {
  require(h > 0.0, "finite_difference_gradient: h must be > 0");
  Vec g(theta.size(), 0.0);
  Vec probe(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = objective(probe, seed);
    probe[i] = theta[i] - h;
    const double down = objective(probe, seed);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ------------------------------------------------------ batch sampling ----

struct AbBatch {
  std::vector<Trajectory> trajectories;
  Vec returns;
};

/// N action-based rollouts at iteration k; rollout i uses seed_for(rollout, k, i).
inline AbBatch collect_ab_batch(const EnvSpec& env, const AbPolicy& policy, std::size_t n, const SeedPlan& plan,
                                std::uint64_t k, std::size_t workers = 1) {
  AbBatch batch;
  batch.trajectories.resize(n);
  batch.returns.assign(n, 0.0);
  const double gamma = discount(env);
  const Actor actor = policy;
  parallel_for(n, workers, [&](std::size_t i) {
    batch.trajectories[i] = rollout(env, actor, horizon(env), plan.seed_for(Purpose::rollout, k, i));
    batch.returns[i] = discounted_return(batch.trajectories[i], gamma);
  });
  return batch;
}

struct PbBatch {
  std::vector<PbReturn> samples;
  std::vector<bool> saturated;
};

/// N parameter draws at iteration k (seed_for(pb_sample, k, i)), each played
/// deterministically for one trajectory (seed_for(rollout, k, i)).
inline PbBatch collect_pb_batch(const EnvSpec& env, const PbHyperpolicy& hyper, std::size_t n, const SeedPlan& plan,
                                std::uint64_t k, std::size_t workers = 1) {
  PbBatch batch;
  batch.samples.resize(n);
  std::vector<char> sat(n, 0);
  const double gamma = discount(env);
  parallel_for(n, workers, [&](std::size_t i) {
    Rng rng(plan.seed_for(Purpose::pb_sample, k, i));
    PbSample drawn = pb_sample_params(hyper, rng);
    const Trajectory tr = rollout(env, Actor{drawn.params}, horizon(env), plan.seed_for(Purpose::rollout, k, i));
    batch.samples[i] = PbReturn{std::move(drawn.params), discounted_return(tr, gamma)};
    sat[i] = tr.saturated ? 1 : 0;
  });
  batch.saturated.assign(sat.begin(), sat.end());
  return batch;
}

/// One full-batch gradient estimate at `params` with exploration `noise`.
inline GradientEstimate sample_gradient_estimate(const EnvSpec& env, Algo algo, const PolicyParams& params,
                                                 const NoiseSpec& noise, std::size_t n, const SeedPlan& plan,
                                                 std::uint64_t k, std::size_t workers = 1) {
  if (algo == Algo::gpomdp) {
    const AbPolicy policy(params, NoiseSpec{noise.kind, params.arch.action_dim, noise.sigma});
    const AbBatch batch = collect_ab_batch(env, policy, n, plan, k, workers);
    return gpomdp_estimate(batch.trajectories, policy, discount(env));
  }
  const PbHyperpolicy hyper(params, NoiseSpec{noise.kind, params.theta.size(), noise.sigma});
  const PbBatch batch = collect_pb_batch(env, hyper, n, plan, k, workers);
  return pgpe_estimate(batch.samples, hyper);
}

// ------------------------------------------------------ variance probe ----

struct ProbeConfig {
  EnvSpec env;
  Algo algo = Algo::pgpe;
  PolicyParams params;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct VarianceRow {
  std::size_t n = 0;
  double trace_variance = 0.0;
  std::size_t reps = 0;
};

/// Empirical trace covariance of the full-batch estimate for each batch
/// size, over `reps` independent repetitions.
inline std::vector<VarianceRow> variance_scaling_probe(const ProbeConfig& cfg, std::span<const std::size_t> n_values,
                                                       std::size_t reps) {
  require(reps >= 100, "variance_scaling_probe: reps must be >= 100");
  std::vector<VarianceRow> rows;
  const SeedPlan outer{cfg.seed};
  for (std::size_t n : n_values) {
    require(n >= 1, "variance_scaling_probe: batch sizes must be >= 1");
    VectorWelford w(cfg.params.theta.size());
    for (std::size_t r = 0; r < reps; ++r) {
      const SeedPlan plan{outer.seed_for(Purpose::probe, n, r)};
      w.add(sample_gradient_estimate(cfg.env, cfg.algo, cfg.params, cfg.noise, n, plan, 0, cfg.workers).grad);
    }
    rows.push_back({n, w.trace_variance(), reps});
  }
  return rows;
}

/// Least-squares slope of log(trace_variance) against log(N).
inline double log_log_slope(std::span<const VarianceRow> rows) {
  require(rows.size() >= 2, "log_log_slope: need at least two rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    require(r.trace_variance > 0.0, "log_log_slope: variance must be positive");
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.trace_variance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(rows.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace wnpg
