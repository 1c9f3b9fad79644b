// Step-size policies for gradient ascent: constant step and Adam, plus the
// constant steps prescribed by the convergence analysis.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "wnpg/core.hpp"

namespace wnpg {

enum class OptimizerKind { constant, adam };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::constant ? "constant" : "adam"; }

inline OptimizerKind optimizer_kind_from_string(std::string_view s) {
  if (s == "constant") return OptimizerKind::constant;
  if (s == "adam") return OptimizerKind::adam;
  throw Error("unknown optimizer '" + std::string(s) + "' (expected adam|constant)");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double step_size = 0.01;
  /// Rescale g to this Euclidean norm when it is larger. Off by default.
  std::optional<double> max_grad_norm;

  void validate() const {
    require(std::isfinite(step_size) && step_size > 0.0, "optimizer: step_size must be finite and > 0");
    if (max_grad_norm) require(*max_grad_norm > 0.0, "optimizer: max_grad_norm must be > 0");
  }

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct OptimizerState {
  OptimizerConfig config;
  Vec m;  // first moment
  Vec v;  // second moment
  std::uint64_t t = 0;

  OptimizerState() = default;
  OptimizerState(OptimizerConfig cfg, std::size_t dim) : config(cfg), m(dim, 0.0), v(dim, 0.0) { cfg.validate(); }
};

struct StepOutput {
  Vec theta;
  OptimizerState state;
};

/// One ascent step. Pure: the input state is not modified.
inline StepOutput step(const OptimizerState& state, std::span<const double> theta, std::span<const double> grad) {
  require_dim(grad.size(), theta.size(), "optimizer step: gradient");
  require_dim(state.m.size(), theta.size(), "optimizer step: state");
  StepOutput out{Vec(theta.begin(), theta.end()), state};
  OptimizerState& s = out.state;
  ++s.t;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error("optimizer step " + std::to_string(s.t) + ": non-finite gradient entry at index " +
                  std::to_string(i));
    }
  }
  Vec g(grad.begin(), grad.end());
  if (s.config.max_grad_norm) {
    const double n = norm(g);
    if (n > *s.config.max_grad_norm) {
      for (double& x : g) x *= *s.config.max_grad_norm / n;
    }
  }
  const double zeta = s.config.step_size;
  if (s.config.kind == OptimizerKind::constant) {
    axpy(zeta, g, out.theta);
    return out;
  }
  const double t = static_cast<double>(s.t);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.m[i] = kAdamBeta1 * s.m[i] + (1.0 - kAdamBeta1) * g[i];
    s.v[i] = kAdamBeta2 * s.v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    out.theta[i] += zeta * m_hat / (std::sqrt(v_hat) + kAdamEps);
  }
  return out;
}

/// min{1/L2, 1/(mu gap), (N/(L2 V mu))^(1/3)} with mu = 1/alpha^2.
/// gap = max{0, J* - J(theta_0) - beta}; gap = 0 disables the middle branch.
inline double theory_constant_step(double alpha, double l2, double v, double n, double gap) {
  require(alpha > 0.0, "theory_constant_step: alpha must be > 0");
  require(l2 > 0.0, "theory_constant_step: L2 must be > 0");
  require(v > 0.0, "theory_constant_step: V must be > 0");
  require(n > 0.0, "theory_constant_step: N must be > 0");
  require(gap >= 0.0, "theory_constant_step: gap must be >= 0");
  const double mu = 1.0 / (alpha * alpha);
  double zeta = std::min(1.0 / l2, std::cbrt(n / (l2 * v * mu)));
  if (gap > 0.0) zeta = std::min(zeta, 1.0 / (mu * gap));
  return zeta;
}

/// eps^2 N / (4 alpha^2 L2 V).
inline double theory_epsilon_step(double alpha, double l2, double v, double n, double epsilon) {
  require(alpha > 0.0 && l2 > 0.0 && v > 0.0 && n > 0.0 && epsilon > 0.0,
          "theory_epsilon_step: inputs must be > 0");
  return epsilon * epsilon * n / (4.0 * alpha * alpha * l2 * v);
}

}  // namespace wnpg
