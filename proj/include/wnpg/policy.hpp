// Deterministic parametric policies mu_theta: S -> A and the two white-noise
// wrappers built on them:
//   * AbPolicy       a = mu_theta(s) + eps, eps redrawn at every step;
//   * PbHyperpolicy  theta' = theta + eps, eps redrawn once per trajectory.
//
// Parameter layout (stable, used by theta_final.f64):
//   linear: Theta is d_A x d_S, flattened row-major.
//   mlp:    d_S -> 32 -> 32 -> d_A, tanh hidden units, linear output.
//           Layer by layer: W1 (row-major), b1, W2, b2, W3, b3.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "wnpg/core.hpp"
#include "wnpg/noise.hpp"

namespace wnpg {

enum class PolicyKind { linear, mlp };

inline std::string_view to_string(PolicyKind k) { return k == PolicyKind::linear ? "linear" : "mlp"; }

inline PolicyKind policy_kind_from_string(std::string_view s) {
  if (s == "linear") return PolicyKind::linear;
  if (s == "mlp") return PolicyKind::mlp;
  throw Error("unknown policy '" + std::string(s) + "' (expected linear|mlp)");
}

inline constexpr std::size_t kMlpHidden = 32;

struct PolicyArch {
  PolicyKind kind = PolicyKind::linear;
  std::size_t state_dim = 1;
  std::size_t action_dim = 1;

  std::size_t param_count() const {
    if (kind == PolicyKind::linear) return action_dim * state_dim;
    const std::size_t h = kMlpHidden;
    return h * state_dim + h + h * h + h + action_dim * h + action_dim;
  }

  friend bool operator==(const PolicyArch&, const PolicyArch&) = default;
};

struct PolicyParams {
  PolicyArch arch;
  Vec theta;

  PolicyParams() = default;
  PolicyParams(PolicyArch a, Vec t) : arch(a), theta(std::move(t)) {
    require(arch.state_dim >= 1 && arch.action_dim >= 1, "policy: dimensions must be >= 1");
    require_dim(theta.size(), arch.param_count(), "policy parameters");
    require(all_finite(theta), "policy: parameters must be finite");
  }

  static PolicyParams zeros(PolicyArch a) { return {a, Vec(a.param_count(), 0.0)}; }
};

/// Linear policies start at zero, MLPs from i.i.d. N(0, 1) entries.
inline PolicyParams initial_params(const PolicyArch& arch, Rng& rng) {
  if (arch.kind == PolicyKind::linear) return PolicyParams::zeros(arch);
  Vec theta(arch.param_count());
  std::normal_distribution<double> z(0.0, 1.0);
  for (double& v : theta) v = z(rng);
  return {arch, std::move(theta)};
}

namespace detail {

// Views into the flat MLP parameter vector.
struct MlpLayout {
  std::size_t ds, da;
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return kMlpHidden * ds; }
  std::size_t w2() const { return b1() + kMlpHidden; }
  std::size_t b2() const { return w2() + kMlpHidden * kMlpHidden; }
  std::size_t w3() const { return b2() + kMlpHidden; }
  std::size_t b3() const { return w3() + da * kMlpHidden; }
};

// out = W x + b, W is rows x cols row-major at theta[w], b at theta[b].
inline void dense(const Vec& theta, std::size_t w, std::size_t b, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = theta[b + r];
    const double* row = theta.data() + w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

struct MlpActivations {
  Vec h1, h2, out;
};

inline MlpActivations mlp_forward(const PolicyParams& p, std::span<const double> s) {
  const MlpLayout lay{p.arch.state_dim, p.arch.action_dim};
  MlpActivations a{Vec(kMlpHidden), Vec(kMlpHidden), Vec(p.arch.action_dim)};
  dense(p.theta, lay.w1(), lay.b1(), kMlpHidden, lay.ds, s, a.h1);
  for (double& v : a.h1) v = std::tanh(v);
  dense(p.theta, lay.w2(), lay.b2(), kMlpHidden, kMlpHidden, a.h1, a.h2);
  for (double& v : a.h2) v = std::tanh(v);
  dense(p.theta, lay.w3(), lay.b3(), lay.da, kMlpHidden, a.h2, a.out);
  return a;
}

}  // namespace detail

inline Vec act_deterministic(const PolicyParams& p, std::span<const double> state) {
  require_dim(state.size(), p.arch.state_dim, "act_deterministic: state");
  if (p.arch.kind == PolicyKind::linear) {
    const std::size_t ds = p.arch.state_dim;
    Vec a(p.arch.action_dim, 0.0);
    for (std::size_t r = 0; r < a.size(); ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < ds; ++c) acc += p.theta[r * ds + c] * state[c];
      a[r] = acc;
    }
    return a;
  }
  return detail::mlp_forward(p, state).out;
}

/// grad_theta mu_theta(s)^T v, by reverse accumulation for the MLP and as the
/// flattened outer product v s^T for the linear map.
inline Vec policy_jacobian_tvp(const PolicyParams& p, std::span<const double> state,
                               std::span<const double> v) {
  require_dim(state.size(), p.arch.state_dim, "policy_jacobian_tvp: state");
  require_dim(v.size(), p.arch.action_dim, "policy_jacobian_tvp: v");
  Vec g(p.theta.size(), 0.0);
  const std::size_t ds = p.arch.state_dim;
  const std::size_t da = p.arch.action_dim;
  if (p.arch.kind == PolicyKind::linear) {
    for (std::size_t r = 0; r < da; ++r) {
      for (std::size_t c = 0; c < ds; ++c) g[r * ds + c] = v[r] * state[c];
    }
    return g;
  }

  const detail::MlpLayout lay{ds, da};
  const auto act = detail::mlp_forward(p, state);
  constexpr std::size_t h = kMlpHidden;
  const double* th = p.theta.data();

  // Output layer.
  for (std::size_t r = 0; r < da; ++r) {
    for (std::size_t c = 0; c < h; ++c) g[lay.w3() + r * h + c] = v[r] * act.h2[c];
    g[lay.b3() + r] = v[r];
  }
  Vec gz2(h, 0.0);
  for (std::size_t c = 0; c < h; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < da; ++r) acc += th[lay.w3() + r * h + c] * v[r];
    gz2[c] = acc * (1.0 - act.h2[c] * act.h2[c]);
  }
  // Second hidden layer.
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < h; ++c) g[lay.w2() + r * h + c] = gz2[r] * act.h1[c];
    g[lay.b2() + r] = gz2[r];
  }
  Vec gz1(h, 0.0);
  for (std::size_t c = 0; c < h; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < h; ++r) acc += th[lay.w2() + r * h + c] * gz2[r];
    gz1[c] = acc * (1.0 - act.h1[c] * act.h1[c]);
  }
  // First hidden layer.
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ds; ++c) g[lay.w1() + r * ds + c] = gz1[r] * state[c];
    g[lay.b1() + r] = gz1[r];
  }
  return g;
}

struct AbPolicy {
  PolicyParams params;
  NoiseSpec noise;

  AbPolicy() = default;
  AbPolicy(PolicyParams p, NoiseSpec n) : params(std::move(p)), noise(n) {
    noise.validate();
    require_dim(noise.dim, params.arch.action_dim, "AbPolicy: noise dim vs action dim");
  }
};

struct PbHyperpolicy {
  PolicyParams mean;
  NoiseSpec noise;

  PbHyperpolicy() = default;
  PbHyperpolicy(PolicyParams m, NoiseSpec n) : mean(std::move(m)), noise(n) {
    noise.validate();
    require_dim(noise.dim, mean.theta.size(), "PbHyperpolicy: noise dim vs parameter count");
  }
};

struct AbAction {
  Vec action;
  Vec eps;
};

inline AbAction ab_sample_action(const AbPolicy& pol, std::span<const double> state, Rng& rng) {
  AbAction out{act_deterministic(pol.params, state), sample(pol.noise, rng)};
  axpy(1.0, out.eps, out.action);
  return out;
}

/// grad_theta log pi_theta(a|s) = J_mu(s)^T (a - mu_theta(s)) / sigma^2.
inline Vec ab_log_policy_gradient(const AbPolicy& pol, std::span<const double> state,
                                  std::span<const double> action) {
  detail::require_gaussian_score(pol.noise);
  require_dim(action.size(), pol.params.arch.action_dim, "ab_log_policy_gradient: action");
  Vec resid = act_deterministic(pol.params, state);
  const double inv_var = 1.0 / (pol.noise.sigma * pol.noise.sigma);
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = (action[i] - resid[i]) * inv_var;
  return policy_jacobian_tvp(pol.params, state, resid);
}

/// log pi_theta(a|s); used by finite-difference oracles.
inline double ab_log_density(const AbPolicy& pol, std::span<const double> state,
                             std::span<const double> action) {
  Vec eps(action.begin(), action.end());
  axpy(-1.0, act_deterministic(pol.params, state), eps);
  return log_density(pol.noise, eps);
}

struct PbSample {
  PolicyParams params;
  Vec eps;
};

inline PbSample pb_sample_params(const PbHyperpolicy& hyper, Rng& rng) {
  Vec eps = sample(hyper.noise, rng);
  Vec theta = hyper.mean.theta;
  axpy(1.0, eps, theta);
  return {PolicyParams(hyper.mean.arch, std::move(theta)), std::move(eps)};
}

/// grad_rho log nu_rho(theta') = (theta' - rho) / sigma^2.
inline Vec pb_log_hyperpolicy_gradient(const PbHyperpolicy& hyper, const PolicyParams& sampled) {
  detail::require_gaussian_score(hyper.noise);
  require_dim(sampled.theta.size(), hyper.mean.theta.size(), "pb_log_hyperpolicy_gradient");
  const double inv_var = 1.0 / (hyper.noise.sigma * hyper.noise.sigma);
  Vec g(sampled.theta.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (sampled.theta[i] - hyper.mean.theta[i]) * inv_var;
  return g;
}

inline double pb_log_density(const PbHyperpolicy& hyper, const PolicyParams& sampled) {
  Vec eps = sampled.theta;
  axpy(-1.0, hyper.mean.theta, eps);
  return log_density(hyper.noise, eps);
}

}  // namespace wnpg
