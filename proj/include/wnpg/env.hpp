// Exactly-solvable environments.
//
// LQR:    x_{t+1} = A x_t + B u_t,  r_t = -x_t' Q x_t - u_t' R u_t,
//         x_0 ~ Uni([-3, 3])^2. Deterministic apart from x_0.
// Bandit: a single state; r(s, a) = (1/d) sum_i f(a_i) with the
//         piecewise-linear peak
//           f(x) = L x + 1      on [-1/L, 0)
//           f(x) = 1 - (L/2) x  on [0, 2/L]
//           f(x) = 0            elsewhere.
//         Policies see the constant dummy state s = 1, so a linear policy
//         on it plays mu_theta(s) = theta.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "wnpg/core.hpp"
#include "wnpg/numerics.hpp"
#include "wnpg/policy.hpp"

namespace wnpg {

/// Row-major 2x2 matrix.
using Mat2 = std::array<double, 4>;

inline constexpr Mat2 diag2(double a, double b) { return {a, 0.0, 0.0, b}; }

struct ActionClip {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const ActionClip&, const ActionClip&) = default;
};

struct LqrSpec {
  Mat2 A = diag2(0.9, 0.9);
  Mat2 B = diag2(0.9, 0.9);
  Mat2 Q = diag2(0.9, 0.1);
  Mat2 R = diag2(0.1, 0.9);
  long horizon = 50;
  double gamma = 1.0;
  double init_low = -3.0;
  double init_high = 3.0;
  std::optional<ActionClip> action_clip;

  /// E[x0_i^2] of the uniform initial state.
  double init_second_moment() const {
    const double w = init_high - init_low;
    const double m = 0.5 * (init_high + init_low);
    return w * w / 12.0 + m * m;
  }

  void validate() const {
    require(horizon >= 1, "lqr: T must be >= 1");
    require(gamma > 0.0 && gamma <= 1.0, "lqr: gamma must be in (0, 1]");
    require(Q[1] == 0.0 && Q[2] == 0.0 && Q[0] > 0.0 && Q[3] > 0.0, "lqr: Q must be diagonal positive");
    require(R[1] == 0.0 && R[2] == 0.0 && R[0] > 0.0 && R[3] > 0.0, "lqr: R must be diagonal positive");
    require(init_low < init_high, "lqr: init range must be non-empty");
  }

  friend bool operator==(const LqrSpec&, const LqrSpec&) = default;
};

struct BanditSpec {
  std::size_t dim = 1;
  double lipschitz = 1.0;
  long horizon = 1;
  double gamma = 1.0;
  std::optional<ActionClip> action_clip;

  void validate() const {
    require(dim >= 1, "bandit: dim must be >= 1");
    require(lipschitz > 0.0, "bandit: lipschitz must be > 0");
    require(horizon >= 1, "bandit: T must be >= 1");
    require(gamma > 0.0 && gamma <= 1.0, "bandit: gamma must be in (0, 1]");
  }

  friend bool operator==(const BanditSpec&, const BanditSpec&) = default;
};

using EnvSpec = std::variant<LqrSpec, BanditSpec>;

inline std::size_t state_dim(const EnvSpec& env) {
  return std::holds_alternative<LqrSpec>(env) ? 2 : 1;
}
inline std::size_t action_dim(const EnvSpec& env) {
  return std::holds_alternative<LqrSpec>(env) ? 2 : std::get<BanditSpec>(env).dim;
}
inline long horizon(const EnvSpec& env) {
  return std::visit([](const auto& e) { return e.horizon; }, env);
}
inline double discount(const EnvSpec& env) {
  return std::visit([](const auto& e) { return e.gamma; }, env);
}
inline std::string env_name(const EnvSpec& env) {
  return std::holds_alternative<LqrSpec>(env) ? "lqr" : "bandit";
}

/// (1 - gamma^T) / (1 - gamma), or T when gamma = 1.
inline double horizon_factor(double gamma, long T) {
  if (gamma == 1.0) return static_cast<double>(T);
  return (1.0 - std::pow(gamma, static_cast<double>(T))) / (1.0 - gamma);
}

// ---------------------------------------------------------------- LQR ----

struct StepResult {
  Vec next_state;
  double reward = 0.0;
};

namespace detail {
inline double lqr_step_into(const LqrSpec& s, const double* x, const double* u, double* next) {
  const double xq0 = s.Q[0] * x[0] + s.Q[1] * x[1];
  const double xq1 = s.Q[2] * x[0] + s.Q[3] * x[1];
  const double ur0 = s.R[0] * u[0] + s.R[1] * u[1];
  const double ur1 = s.R[2] * u[0] + s.R[3] * u[1];
  const double reward = -(x[0] * xq0 + x[1] * xq1) - (u[0] * ur0 + u[1] * ur1);
  const double n0 = s.A[0] * x[0] + s.A[1] * x[1] + s.B[0] * u[0] + s.B[1] * u[1];
  const double n1 = s.A[2] * x[0] + s.A[3] * x[1] + s.B[2] * u[0] + s.B[3] * u[1];
  next[0] = n0;
  next[1] = n1;
  return reward;
}
}  // namespace detail

inline StepResult lqr_step(const LqrSpec& spec, std::span<const double> state, std::span<const double> action) {
  require_dim(state.size(), 2, "lqr_step: state");
  require_dim(action.size(), 2, "lqr_step: action");
  StepResult r{Vec(2), 0.0};
  r.reward = detail::lqr_step_into(spec, state.data(), action.data(), r.next_state.data());
  return r;
}

/// Exact value of the stationary linear policy u = K x (K row-major 2x2)
/// averaged over the initial-state distribution, via the second-moment
/// recursion S_{t+1} = C S_t C', C = A + B K, S_0 = E[x0 x0'].
inline double lqr_linear_policy_value(const LqrSpec& spec, const Mat2& K) {
  const auto mul = [](const Mat2& a, const Mat2& b) {
    return Mat2{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
  };
  const auto transpose = [](const Mat2& a) { return Mat2{a[0], a[2], a[1], a[3]}; };
  const auto add = [](const Mat2& a, const Mat2& b) {
    return Mat2{a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
  };
  const auto trace_prod = [](const Mat2& a, const Mat2& b) {
    return a[0] * b[0] + a[1] * b[2] + a[2] * b[1] + a[3] * b[3];
  };
  const Mat2 C = add(spec.A, mul(spec.B, K));
  const Mat2 Ct = transpose(C);
  const Mat2 cost = add(spec.Q, mul(transpose(K), mul(spec.R, K)));
  const double m2 = spec.init_second_moment();
  Mat2 S = {m2, 0.0, 0.0, m2};
  double value = 0.0, disc = 1.0;
  for (long t = 0; t < spec.horizon; ++t) {
    value -= disc * trace_prod(cost, S);
    S = mul(C, mul(S, Ct));
    disc *= spec.gamma;
  }
  return value;
}

/// Closed-form value of the scalar subsystem (a, b, q, r) under gain k:
/// -E[x0^2] (q + k^2 r) sum_{t<T} (gamma c^2)^t, c = a + b k.
inline double lqr_scalar_value(double a, double b, double q, double r, double k, double gamma, long T,
                               double init_second_moment) {
  const double c = a + b * k;
  return -init_second_moment * (q + k * k * r) * geometric_sum(gamma * c * c, T);
}

struct LqrOptimum {
  std::array<double, 2> gain{};  // diagonal of K*
  double value = 0.0;            // J*
};

/// Best stationary diagonal gain by golden-section search of each decoupled
/// coordinate over k in [-2, 0].
inline LqrOptimum lqr_optimal_stationary_gain(const LqrSpec& spec) {
  for (const Mat2* m : {&spec.A, &spec.B, &spec.Q, &spec.R}) {
    require((*m)[1] == 0.0 && (*m)[2] == 0.0, "lqr_optimal_stationary_gain: matrices must be diagonal");
  }
  const double m2 = spec.init_second_moment();
  LqrOptimum opt;
  for (int i = 0; i < 2; ++i) {
    const int d = i * 3;
    auto value = [&](double k) {
      return lqr_scalar_value(spec.A[d], spec.B[d], spec.Q[d], spec.R[d], k, spec.gamma, spec.horizon, m2);
    };
    const double k = golden_section_maximize<double>(value, -2.0, 0.0, 1e-10);
    opt.gain[i] = k;
    opt.value += value(k);
  }
  return opt;
}

// ------------------------------------------------------------- bandit ----

inline double bandit_f(double lipschitz, double x) {
  const double L = lipschitz;
  if (x < -1.0 / L || x > 2.0 / L) return 0.0;
  if (x < 0.0) return L * x + 1.0;
  return 1.0 - 0.5 * L * x;
}

inline double bandit_f(const BanditSpec& spec, double x) { return bandit_f(spec.lipschitz, x); }

inline double bandit_reward(const BanditSpec& spec, std::span<const double> action) {
  require_dim(action.size(), spec.dim, "bandit_reward: action");
  double s = 0.0;
  for (double a : action) s += bandit_f(spec.lipschitz, a);
  return s / static_cast<double>(spec.dim);
}

/// J_D(theta) = horizon_factor * (1/d) sum_i f(theta_i).
inline double bandit_jd_analytic(const BanditSpec& spec, std::span<const double> theta) {
  return horizon_factor(spec.gamma, spec.horizon) * bandit_reward(spec, theta);
}

namespace detail {

// Antiderivative of f with F(-inf) = 0.
template <typename Real>
Real bandit_f_antiderivative(Real L, Real x) {
  if (x < -1 / L) return Real(0);
  if (x < 0) return L * x * x / 2 + x + 1 / (2 * L);
  if (x <= 2 / L) return 1 / (2 * L) + x - L * x * x / 4;
  return 3 / (2 * L);
}

}  // namespace detail

/// (f * psi_sigma)(x): f averaged over x + Uni([-sqrt(3) sigma, sqrt(3) sigma]).
/// Inside the window where x - sqrt(3) sigma lies on the rising edge and
/// x + sqrt(3) sigma on the falling edge, the closed quadratic
///   1 - (L/2 (x - a)^2 + L/4 (x + a)^2) / (2a),  a = sqrt(3) sigma,
/// is used; elsewhere the exact antiderivative difference.
template <typename Real>
Real bandit_smoothed_f(Real L, Real x, Real sigma) {
  if (sigma == 0) {
    if (x < -1 / L || x > 2 / L) return Real(0);
    return x < 0 ? L * x + 1 : 1 - L * x / 2;
  }
  const Real a = std::sqrt(Real(3)) * sigma;
  const Real lo = x - a, hi = x + a;
  if (lo >= -1 / L && lo < 0 && hi >= 0 && hi <= 2 / L) {
    return 1 - (L / 2 * lo * lo + L / 4 * hi * hi) / (2 * a);
  }
  return (detail::bandit_f_antiderivative(L, hi) - detail::bandit_f_antiderivative(L, lo)) / (2 * a);
}

/// J_P(theta) under uniform-hypercube parameter noise of scale sigma.
/// Defined for sqrt(3) sigma <= 1/L.
inline double bandit_jp_analytic(const BanditSpec& spec, std::span<const double> theta, double sigma) {
  require_dim(theta.size(), spec.dim, "bandit_jp_analytic: theta");
  require(sigma >= 0.0, "bandit_jp_analytic: sigma must be >= 0");
  require(std::sqrt(3.0) * sigma <= 1.0 / spec.lipschitz,
          "bandit_jp_analytic: requires sqrt(3) sigma <= 1/L");
  double s = 0.0;
  for (double t : theta) s += bandit_smoothed_f<double>(spec.lipschitz, t, sigma);
  return horizon_factor(spec.gamma, spec.horizon) * s / static_cast<double>(spec.dim);
}

// ------------------------------------------------------------ rollout ----

/// Fixed-horizon trajectory. States and actions are stored flat with
/// strides state_dim and action_dim. Actions are the ones the policy
/// emitted (before any clipping applied by the environment).
struct Trajectory {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Vec states;
  Vec actions;
  Vec rewards;
  std::uint64_t seed = 0;
  std::optional<Vec> sampled_theta;
  bool saturated = false;

  std::size_t length() const { return rewards.size(); }
  std::span<const double> state(std::size_t t) const {
    return {states.data() + t * state_dim, state_dim};
  }
  std::span<const double> action(std::size_t t) const {
    return {actions.data() + t * action_dim, action_dim};
  }
};

inline constexpr double kSaturationNorm = 1e9;

using Actor = std::variant<AbPolicy, PolicyParams>;

namespace detail {

inline Vec initial_state(const EnvSpec& env, Rng& rng) {
  if (const auto* lqr = std::get_if<LqrSpec>(&env)) {
    std::uniform_real_distribution<double> u(lqr->init_low, lqr->init_high);
    const double x0 = u(rng);
    const double x1 = u(rng);
    return {x0, x1};
  }
  return {1.0};
}

inline void apply_clip(const std::optional<ActionClip>& clip, Vec& a) {
  if (!clip) return;
  for (double& v : a) v = std::clamp(v, clip->lo, clip->hi);
}

}  // namespace detail

/// Plays one trajectory of `T` steps. AbPolicy actors draw fresh action
/// noise every step; PolicyParams actors act deterministically. All
/// randomness (initial state, action noise) comes from a generator seeded
/// with `seed`.
inline Trajectory rollout(const EnvSpec& env, const Actor& actor, long T, std::uint64_t seed) {
  require(T >= 1, "rollout: T must be >= 1");
  const PolicyParams& params =
      std::holds_alternative<AbPolicy>(actor) ? std::get<AbPolicy>(actor).params : std::get<PolicyParams>(actor);
  const std::size_t ds = state_dim(env), da = action_dim(env);
  require_dim(params.arch.state_dim, ds, "rollout: policy state dim");
  require_dim(params.arch.action_dim, da, "rollout: policy action dim");

  Rng rng(seed);
  Trajectory traj;
  traj.state_dim = ds;
  traj.action_dim = da;
  traj.seed = seed;
  traj.states.reserve(static_cast<std::size_t>(T) * ds);
  traj.actions.reserve(static_cast<std::size_t>(T) * da);
  traj.rewards.reserve(static_cast<std::size_t>(T));

  Vec x = detail::initial_state(env, rng);
  Vec next(ds);
  const AbPolicy* ab = std::get_if<AbPolicy>(&actor);
  for (long t = 0; t < T; ++t) {
    Vec a = act_deterministic(params, x);
    if (ab) axpy(1.0, sample(ab->noise, rng), a);
    traj.states.insert(traj.states.end(), x.begin(), x.end());
    traj.actions.insert(traj.actions.end(), a.begin(), a.end());

    if (const auto* lqr = std::get_if<LqrSpec>(&env)) {
      detail::apply_clip(lqr->action_clip, a);
      traj.rewards.push_back(detail::lqr_step_into(*lqr, x.data(), a.data(), next.data()));
      x.swap(next);
      if (!traj.saturated && !(norm(x) <= kSaturationNorm)) traj.saturated = true;
    } else {
      const auto& bandit = std::get<BanditSpec>(env);
      detail::apply_clip(bandit.action_clip, a);
      traj.rewards.push_back(bandit_reward(bandit, a));
    }
  }
  return traj;
}

}  // namespace wnpg
