// Formula engine for the regularity constants, deployment-gap bounds,
// step sizes, sample complexities and weak-gradient-domination transfer of
// white-noise policy-gradient methods.
//
// Two renderings exist for the Lipschitz, smoothness and variance constants:
//   lemma   the sharper expressions (leading gamma in L, gamma(1+gamma) and
//           gamma factors in L2, R_max squared in the variance bounds);
//   table1  the simplified summary forms (no leading gamma in L, 2 L_p^2
//           L_mu^2 R_max in L2, R_max to the first power in V).
// The lemma rendering is the default everywhere.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wnpg/core.hpp"
#include "wnpg/optimize.hpp"

namespace wnpg {

struct RegularityConstants {
  double L_p = 0.0;
  double L_r = 0.0;
  double L_2p = 0.0;
  double L_2r = 0.0;
  double L_mu = 0.0;
  double L_2mu = 0.0;
  double R_max = 0.0;
  double gamma = 0.0;
  /// Horizon; empty means infinite.
  std::optional<long> T;
  double c = 1.0;
  std::size_t d_theta = 1;
  std::size_t d_action = 1;

  void validate() const {
    for (double v : {L_p, L_r, L_2p, L_2r, L_mu, L_2mu, R_max, c}) {
      require(std::isfinite(v) && v >= 0.0, "regularity constants: entries must be finite and >= 0");
    }
    require(gamma >= 0.0 && gamma < 1.0, "regularity constants: gamma must be in [0, 1)");
    if (T) require(*T >= 1, "regularity constants: T must be >= 1");
  }

  /// 1 - gamma^T, or 1 for an infinite horizon.
  double horizon_term() const { return T ? 1.0 - std::pow(gamma, static_cast<double>(*T)) : 1.0; }
};

enum class Rendering { lemma, table1 };
enum class Exploration { ab, pb };
enum class SmoothnessBranch { l2, noise };

inline std::string_view to_string(Exploration e) { return e == Exploration::ab ? "ab" : "pb"; }
inline std::string_view to_string(SmoothnessBranch b) { return b == SmoothnessBranch::l2 ? "L2" : "noise"; }

namespace detail {
inline void require_discounted(double gamma, const char* what) {
  require(gamma >= 0.0 && gamma < 1.0, std::string(what) + ": gamma must be in [0, 1)");
}
}  // namespace detail

// ----------------------------------------------------------- constants ----

struct LipschitzConstants {
  double L = 0.0;
  double L_J = 0.0;
  /// Per-step sensitivity L_t(k); zero for k >= T.
  std::function<double(long)> L_t;
};

inline LipschitzConstants lipschitz_constants(const RegularityConstants& rc, Rendering mode = Rendering::lemma) {
  rc.validate();
  detail::require_discounted(rc.gamma, "lipschitz_constants");
  const double g = rc.gamma, om = 1.0 - g;
  const double ht = mode == Rendering::lemma ? rc.horizon_term() : 1.0;
  const double lead = mode == Rendering::lemma ? g : 1.0;
  LipschitzConstants out;
  out.L = lead * ht / (om * om) * rc.L_p * rc.R_max + ht / om * rc.L_r;
  out.L_J = out.L * rc.L_mu;
  out.L_t = [rc, g, om](long k) {
    require(k >= 0, "L_t: k must be >= 0");
    if (rc.T && k >= *rc.T) return 0.0;
    const double gT = rc.T ? std::pow(g, static_cast<double>(*rc.T)) : 0.0;
    const double gk = std::pow(g, static_cast<double>(k));
    return (gk * g - gT) / om * rc.L_p * rc.R_max + gk * rc.L_r;
  };
  return out;
}

inline double smoothness_L2(const RegularityConstants& rc, Rendering mode = Rendering::lemma) {
  rc.validate();
  detail::require_discounted(rc.gamma, "smoothness_L2");
  const double g = rc.gamma, om = 1.0 - g;
  const double mu2 = rc.L_mu * rc.L_mu;
  if (mode == Rendering::table1) {
    return 2.0 * rc.L_p * rc.L_p * mu2 * rc.R_max / (om * om * om) +
           (2.0 * mu2 * rc.L_p * rc.L_r + rc.L_2mu * rc.L_2p * rc.R_max) / (om * om) + rc.L_2mu * rc.L_2r / om;
  }
  return g * (1.0 + g) * mu2 * rc.L_p * rc.L_p * rc.R_max / (om * om * om) +
         g * (2.0 * mu2 * rc.L_p * rc.L_r + rc.L_2mu * rc.L_2p * rc.R_max) / (om * om) + rc.L_2mu * rc.L_2r / om;
}

struct SmoothnessBound {
  double value = 0.0;
  SmoothnessBranch branch = SmoothnessBranch::l2;
  /// The noise-based bound, when it applies.
  std::optional<double> noise_branch;
};

/// Noise-only smoothness bound of J_P or J_A. For AB exploration it only
/// holds for sigma < sqrt(d_A); empty otherwise.
inline std::optional<double> noise_smoothness(const RegularityConstants& rc, Exploration which, double sigma) {
  rc.validate();
  detail::require_discounted(rc.gamma, "objective_smoothness");
  require(sigma > 0.0, "objective_smoothness: sigma must be > 0");
  const double om = 1.0 - rc.gamma;
  const double base = rc.R_max * rc.c / (sigma * sigma * om * om);
  if (which == Exploration::pb) return base * (static_cast<double>(rc.d_theta) + 1.0);
  if (!(sigma < std::sqrt(static_cast<double>(rc.d_action)))) return std::nullopt;
  return base * (static_cast<double>(rc.d_action) + 1.0) * (rc.L_mu * rc.L_mu + rc.L_2mu);
}

/// min of the applicable bounds on the smoothness of J_P or J_A, tagged
/// with the branch that attains it.
inline SmoothnessBound objective_smoothness(const RegularityConstants& rc, Exploration which, double sigma,
                                            Rendering mode = Rendering::lemma) {
  SmoothnessBound out;
  out.noise_branch = noise_smoothness(rc, which, sigma);
  out.value = smoothness_L2(rc, mode);
  out.branch = SmoothnessBranch::l2;
  if (out.noise_branch && *out.noise_branch < out.value) {
    out.value = *out.noise_branch;
    out.branch = SmoothnessBranch::noise;
  }
  return out;
}

/// V such that the estimator variance is at most V / N.
inline double variance_bounds(const RegularityConstants& rc, Exploration which, double sigma,
                              Rendering mode = Rendering::lemma) {
  rc.validate();
  detail::require_discounted(rc.gamma, "variance_bounds");
  require(sigma > 0.0, "variance_bounds: sigma must be > 0");
  const double om = 1.0 - rc.gamma;
  const double r = mode == Rendering::lemma ? rc.R_max * rc.R_max : rc.R_max;
  const double ht = mode == Rendering::lemma ? rc.horizon_term() : 1.0;
  const double s2 = sigma * sigma;
  if (which == Exploration::pb) {
    return r * rc.c * static_cast<double>(rc.d_theta) / s2 * ht * ht / (om * om);
  }
  return r * rc.c * static_cast<double>(rc.d_action) * rc.L_mu * rc.L_mu / s2 * ht / (om * om * om);
}

// ------------------------------------------------------ deployment gap ----

inline constexpr double kTightnessFloor = 0.28;

struct DeploymentGap {
  double uniform = 0.0;        // sup |J_D - J_dagger|
  double suboptimality = 0.0;  // J_D* - J_D(theta_dagger*)
  double tightness_floor = 0.0;
};

/// Gap bounds for Lipschitz constant `lipschitz` (L_J for PB, L for AB).
inline DeploymentGap deployment_gap_bound(double lipschitz, double d, double sigma) {
  require(lipschitz >= 0.0 && d >= 0.0 && sigma >= 0.0, "deployment_gap_bound: inputs must be >= 0");
  const double u = lipschitz * std::sqrt(d) * sigma;
  return {u, 2.0 * u, kTightnessFloor * u};
}

/// eps / (6 L sqrt(d)): the deployment gap then contributes exactly eps/2
/// through 3 L sqrt(d) sigma.
inline double sigma_adaptive(double epsilon, double lipschitz, double d) {
  require(epsilon > 0.0 && lipschitz > 0.0 && d > 0.0, "sigma_adaptive: inputs must be > 0");
  return epsilon / (6.0 * lipschitz * std::sqrt(d));
}

// ------------------------------------------------ convergence and rates ----

enum class ObjectiveTag { deterministic, action_based, parameter_based };

inline std::string_view to_string(ObjectiveTag t) {
  switch (t) {
    case ObjectiveTag::deterministic: return "J_D";
    case ObjectiveTag::action_based: return "J_A";
    case ObjectiveTag::parameter_based: return "J_P";
  }
  return "?";
}

/// Weak gradient domination: J* - J(theta) <= alpha ||grad J(theta)|| + beta.
struct WgdParams {
  double alpha = 1.0;
  double beta = 0.0;
  ObjectiveTag objective = ObjectiveTag::deterministic;

  void validate() const {
    require(alpha > 0.0, "wgd: alpha must be > 0");
    require(beta >= 0.0, "wgd: beta must be >= 0");
  }
};

/// 16 alpha^4 L2 V / eps^3 * log(max{0, J_gap - beta} / eps), with
/// J_gap = J* - J(theta_0). Zero when the log argument is at most 1.
inline double sample_complexity(const WgdParams& wgd, double l2, double v, double epsilon, double j_gap) {
  wgd.validate();
  require(epsilon > 0.0, "sample_complexity: epsilon must be > 0");
  require(l2 > 0.0 && v > 0.0, "sample_complexity: L2 and V must be > 0");
  require(j_gap >= 0.0, "sample_complexity: J_gap must be >= 0");
  const double arg = std::max(0.0, j_gap - wgd.beta) / epsilon;
  if (arg <= 1.0) return 0.0;
  const double a2 = wgd.alpha * wgd.alpha;
  return 16.0 * a2 * a2 * l2 * v / (epsilon * epsilon * epsilon) * std::log(arg);
}

struct ConvergenceCurve {
  std::vector<double> bound;  // bound[k-1] for k = 1..K
  double asymptote = 0.0;     // sqrt(L2 V zeta / (mu N))
};

/// Upper bound on J* - J(theta_k) under a constant step zeta:
///   beta + (1 - sqrt(mu zeta^3 L2 V / N) / 2)^k max{0, gap} + sqrt(L2 V zeta / (mu N)),
/// with mu = 1/alpha^2 and gap = J_gap - beta.
inline ConvergenceCurve convergence_curve(const WgdParams& wgd, double l2, double v, double n, double zeta,
                                          std::size_t K, double j_gap) {
  wgd.validate();
  require(K >= 1, "convergence_curve: K must be >= 1");
  require(zeta > 0.0, "convergence_curve: zeta must be > 0");
  const double gap = std::max(0.0, j_gap - wgd.beta);
  const double mu = 1.0 / (wgd.alpha * wgd.alpha);
  const double slack = 1.0 + 1e-12;
  require(zeta <= slack / l2, "convergence_curve: zeta exceeds 1/L2");
  if (gap > 0.0) require(zeta <= slack / (mu * gap), "convergence_curve: zeta exceeds 1/(mu gap)");
  require(zeta <= slack * std::cbrt(n / (l2 * v * mu)), "convergence_curve: zeta exceeds (N/(L2 V mu))^(1/3)");
  (void)theory_constant_step(wgd.alpha, l2, v, n, gap);  // validates the remaining inputs

  ConvergenceCurve out;
  out.asymptote = std::sqrt(l2 * v * zeta / (mu * n));
  const double rate = 1.0 - 0.5 * std::sqrt(mu * zeta * zeta * zeta * l2 * v / n);
  double contraction = 1.0;
  out.bound.reserve(K);
  for (std::size_t k = 1; k <= K; ++k) {
    contraction *= rate;
    out.bound.push_back(wgd.beta + contraction * gap + out.asymptote);
  }
  return out;
}

// --------------------------------------------------------- WGD transfer ----

enum class WgdTransferMode { inherited_pb, inherited_ab, fisher };

inline WgdTransferMode wgd_transfer_mode_from_string(std::string_view s) {
  if (s == "inherited_pb") return WgdTransferMode::inherited_pb;
  if (s == "inherited_ab") return WgdTransferMode::inherited_ab;
  if (s == "fisher") return WgdTransferMode::fisher;
  throw Error("unknown wgd transfer mode '" + std::string(s) + "'");
}

struct WgdTransferInputs {
  WgdParams deterministic;  // alpha_D, beta_D (inherited modes)
  double sigma = 0.0;
  double dim = 1.0;              // d_theta or d_A
  double l2 = 0.0;               // inherited_pb: smoothness constant of J_D
  double lipschitz = 0.0;        // L_P (inherited_pb) or L_A (inherited_ab)
  RegularityConstants rc;        // inherited_ab (psi) and fisher (gamma)
  double C = 0.0;                // fisher
  double lambda_exp = 0.0;       // fisher
  double eps_bias = 0.0;         // fisher
};

/// psi = L_mu (L_p^2 R gamma/(1-gamma)^4 + (L_r L_p + R L_2p + L_p L_r gamma)/(1-gamma)^2
///       + L_2r/(1-gamma)) (1 - gamma^T).
inline double inherited_ab_psi(const RegularityConstants& rc) {
  rc.validate();
  detail::require_discounted(rc.gamma, "wgd_transfer");
  const double g = rc.gamma, om = 1.0 - g;
  const double om2 = om * om;
  return rc.L_mu *
         (rc.L_p * rc.L_p * rc.R_max * g / (om2 * om2) +
          (rc.L_r * rc.L_p + rc.R_max * rc.L_2p + rc.L_p * rc.L_r * g) / om2 + rc.L_2r / om) *
         rc.horizon_term();
}

inline WgdParams wgd_transfer(WgdTransferMode mode, const WgdTransferInputs& in) {
  require(in.sigma >= 0.0, "wgd_transfer: sigma must be >= 0");
  require(in.dim > 0.0, "wgd_transfer: dimension must be > 0");
  switch (mode) {
    case WgdTransferMode::inherited_pb: {
      in.deterministic.validate();
      const double beta = in.deterministic.beta +
                          (in.deterministic.alpha * in.l2 + in.lipschitz) * in.sigma * std::sqrt(in.dim);
      return {in.deterministic.alpha, beta, ObjectiveTag::parameter_based};
    }
    case WgdTransferMode::inherited_ab: {
      in.deterministic.validate();
      const double psi = inherited_ab_psi(in.rc);
      const double beta = in.deterministic.beta +
                          (in.deterministic.alpha * psi + in.lipschitz) * in.sigma * std::sqrt(in.dim);
      return {in.deterministic.alpha, beta, ObjectiveTag::action_based};
    }
    case WgdTransferMode::fisher: {
      detail::require_discounted(in.rc.gamma, "wgd_transfer");
      require(in.lambda_exp > 0.0, "wgd_transfer: lambda_exp must be > 0");
      require(in.C > 0.0, "wgd_transfer: C must be > 0");
      require(in.eps_bias >= 0.0, "wgd_transfer: eps_bias must be >= 0");
      require(in.sigma > 0.0, "wgd_transfer: sigma must be > 0 for the fisher mode");
      const double alpha = in.C * std::sqrt(in.dim) * in.sigma / in.lambda_exp;
      const double beta = std::sqrt(in.eps_bias) / (1.0 - in.rc.gamma);
      return {alpha, beta, ObjectiveTag::action_based};
    }
  }
  throw Error("wgd_transfer: unknown mode");
}

// ----------------------------------------------------------- rate table ----

namespace rates {

/// Symbols tracked by the rate algebra. H stands for 1/(1 - gamma).
enum Var : std::size_t { H = 0, D = 1, SIGMA = 2, EPS = 3, ALPHA = 4 };
inline constexpr std::size_t kVars = 5;
inline constexpr std::array<const char*, kVars> kVarNames = {"H", "d", "sigma", "eps", "alpha"};

using Point = std::array<double, kVars>;

/// x^e for integer e by repeated squaring, so that scaling x by a power of
/// two scales the result by an exact power of two.
inline double ipow(double x, long e) {
  if (e < 0) return 1.0 / ipow(x, -e);
  double r = 1.0, b = x;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline double power(double x, double e) {
  const double r = std::round(e);
  if (std::abs(e - r) < 1e-12) return ipow(x, static_cast<long>(r));
  return std::pow(x, e);
}

struct Monomial {
  double coef = 1.0;
  std::array<double, kVars> exp{};

  double eval(const Point& p) const {
    double v = coef;
    for (std::size_t i = 0; i < kVars; ++i) {
      if (exp[i] != 0.0) v *= power(p[i], exp[i]);
    }
    return v;
  }
};

inline Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial m{a.coef * b.coef, {}};
  for (std::size_t i = 0; i < kVars; ++i) m.exp[i] = a.exp[i] + b.exp[i];
  return m;
}

inline Monomial mono(double coef, std::initializer_list<std::pair<Var, double>> exps = {}) {
  Monomial m{coef, {}};
  for (const auto& [v, e] : exps) m.exp[v] += e;
  return m;
}

/// Sum of monomials with positive coefficients; zero terms are dropped.
struct Posynomial {
  std::vector<Monomial> terms;

  Posynomial() = default;
  Posynomial(std::initializer_list<Monomial> ms) {
    for (const auto& m : ms) add(m);
  }

  void add(const Monomial& m) {
    require(m.coef >= 0.0, "posynomial: coefficients must be >= 0");
    if (m.coef > 0.0) terms.push_back(m);
  }

  double eval(const Point& p) const {
    double s = 0.0;
    for (const auto& m : terms) s += m.eval(p);
    return s;
  }
};

/// True when the symbol grows in the asymptotic regime (H, d); false when
/// it shrinks (sigma, eps). alpha is treated as growing.
inline bool grows(Var v) { return v == H || v == D || v == ALPHA; }

/// Product of posynomials raised to integer powers (possibly negative).
struct Expr {
  std::vector<std::pair<Posynomial, int>> factors;

  double eval(const Point& p) const {
    double v = 1.0;
    for (const auto& [poly, k] : factors) v *= ipow(poly.eval(p), k);
    return v;
  }

  /// Exponent that governs the expression as the symbol approaches its
  /// asymptotic regime.
  double dominant_exponent(Var v) const {
    double total = 0.0;
    for (const auto& [poly, k] : factors) total += k * leading_exponent(poly, v);
    return total;
  }

  /// Same product with every factor reduced to its terms that carry the
  /// dominant exponent of `v`; scales exactly as v^dominant_exponent(v).
  Expr leading(Var v) const {
    Expr out;
    for (const auto& [poly, k] : factors) {
      const double e = leading_exponent(poly, v);
      Posynomial lead;
      for (const auto& m : poly.terms) {
        if (m.exp[v] == e) lead.add(m);
      }
      out.factors.push_back({lead, k});
    }
    return out;
  }

  static double leading_exponent(const Posynomial& poly, Var v) {
    require(!poly.terms.empty(), "rate algebra: empty posynomial factor");
    double e = poly.terms.front().exp[v];
    for (const auto& m : poly.terms) e = grows(v) ? std::max(e, m.exp[v]) : std::min(e, m.exp[v]);
    return e;
  }
};

inline Expr operator*(Expr a, const Expr& b) {
  a.factors.insert(a.factors.end(), b.factors.begin(), b.factors.end());
  return a;
}

inline Expr factor(Posynomial p, int k = 1) { return Expr{{{std::move(p), k}}}; }

/// log2 of expr(2 x_v) / expr(x_v) evaluated on the leading part.
inline double log2_ratio_probe(const Expr& e, Var v, const Point& p) {
  const Expr lead = e.leading(v);
  Point q = p;
  q[v] *= 2.0;
  return std::log2(lead.eval(q) / lead.eval(p));
}

}  // namespace rates

enum class SigmaMode { fixed, adaptive };

struct RateQuery {
  double epsilon = 0.1;
  double sigma = 0.1;  // fixed-sigma rows
  double alpha = 1.0;
  double beta = 0.0;
  double j_gap = 1.0;  // J* - J(theta_0)
};

struct RateCell {
  std::string algo;  // "GPOMDP" or "PGPE"
  SigmaMode sigma_mode = SigmaMode::fixed;
  bool smoothness = false;
  double sigma = 0.0;  // sigma actually used
  double core = 0.0;   // 16 alpha^4 L2 V / eps'^3
  double log_factor = 0.0;
  double nk = 0.0;
  double exp_eps = 0.0;    // NK ~ eps^exp_eps
  double exp_H = 0.0;      // NK ~ (1-gamma)^(-exp_H)
  double exp_d = 0.0;      // NK ~ d^exp_d
  double exp_sigma = 0.0;  // NK ~ sigma^exp_sigma (0 for adaptive rows)
  rates::Expr expr;
  rates::Point point{};
};

namespace detail {

using rates::ALPHA;
using rates::D;
using rates::EPS;
using rates::H;
using rates::mono;
using rates::Posynomial;
using rates::SIGMA;

// L (lemma rendering) as a posynomial in H.
inline Posynomial lipschitz_poly(const RegularityConstants& rc) {
  const double ht = rc.horizon_term();
  return {mono(rc.gamma * ht * rc.L_p * rc.R_max, {{H, 2}}), mono(ht * rc.L_r, {{H, 1}})};
}

inline Posynomial l2_poly(const RegularityConstants& rc) {
  const double g = rc.gamma, mu2 = rc.L_mu * rc.L_mu;
  return {mono(g * (1 + g) * mu2 * rc.L_p * rc.L_p * rc.R_max, {{H, 3}}),
          mono(g * (2 * mu2 * rc.L_p * rc.L_r + rc.L_2mu * rc.L_2p * rc.R_max), {{H, 2}}),
          mono(rc.L_2mu * rc.L_2r, {{H, 1}})};
}

}  // namespace detail

/// Composes the eight (algorithm x sigma mode x smoothness) sample
/// complexity bounds from the lemma-level constants and reports their
/// numeric value together with the dominant exponents of eps, 1/(1-gamma),
/// d and sigma. Adaptive rows use sigma = sigma_adaptive(eps, L_dagger, d)
/// with L_P = L L_mu and L_A = L, and target eps/2 for the optimization of
/// the stochastic objective. Rows without smoothness bound the smoothness
/// with the noise branch; rows with smoothness with L2.
inline std::vector<RateCell> rate_table(const RegularityConstants& rc, const RateQuery& q) {
  using namespace rates;
  rc.validate();
  detail::require_discounted(rc.gamma, "rate_table");
  require(q.epsilon > 0.0 && q.sigma > 0.0 && q.alpha > 0.0, "rate_table: epsilon, sigma and alpha must be > 0");
  const double ht = rc.horizon_term();
  std::vector<RateCell> out;
  for (const bool pb : {false, true}) {
    const double dim = static_cast<double>(pb ? rc.d_theta : rc.d_action);
    for (const SigmaMode mode : {SigmaMode::fixed, SigmaMode::adaptive}) {
      for (const bool smooth : {false, true}) {
        // sigma as an expression: either the free symbol or eps/(6 L_dagger sqrt(d)).
        const double eps_target_scale = mode == SigmaMode::adaptive ? 0.5 : 1.0;
        Expr sigma_inv2;  // sigma^-2
        if (mode == SigmaMode::fixed) {
          sigma_inv2 = factor(Posynomial{mono(1.0, {{SIGMA, -2}})});
        } else {
          // sigma^-2 = 36 L_dagger^2 d / eps^2
          const double lmu = pb ? rc.L_mu : 1.0;
          sigma_inv2 = factor(Posynomial{mono(36.0 * lmu * lmu, {{D, 1}, {EPS, -2}})}) *
                       factor(detail::lipschitz_poly(rc), 2);
        }
        Expr l2;
        if (smooth) {
          l2 = factor(detail::l2_poly(rc));
        } else if (pb) {
          l2 = factor(Posynomial{mono(rc.R_max * rc.c, {{H, 2}, {D, 1}}), mono(rc.R_max * rc.c, {{H, 2}})}) *
               sigma_inv2;
        } else {
          const double k = rc.R_max * rc.c * (rc.L_mu * rc.L_mu + rc.L_2mu);
          l2 = factor(Posynomial{mono(k, {{H, 2}, {D, 1}}), mono(k, {{H, 2}})}) * sigma_inv2;
        }
        Expr v;
        if (pb) {
          v = factor(Posynomial{mono(rc.R_max * rc.R_max * rc.c * ht * ht, {{D, 1}, {H, 2}})}) * sigma_inv2;
        } else {
          v = factor(Posynomial{mono(rc.R_max * rc.R_max * rc.c * rc.L_mu * rc.L_mu * ht, {{D, 1}, {H, 3}})}) *
              sigma_inv2;
        }
        const double e3 = eps_target_scale * eps_target_scale * eps_target_scale;
        const Expr lead = factor(Posynomial{mono(16.0 / e3, {{ALPHA, 4}, {EPS, -3}})});
        RateCell cell;
        cell.algo = pb ? "PGPE" : "GPOMDP";
        cell.sigma_mode = mode;
        cell.smoothness = smooth;
        cell.expr = lead * l2 * v;
        cell.point = {1.0 / (1.0 - rc.gamma), dim, q.sigma, q.epsilon, q.alpha};
        cell.core = cell.expr.eval(cell.point);
        const double eps_target = eps_target_scale * q.epsilon;
        const double arg = std::max(0.0, q.j_gap - q.beta) / eps_target;
        cell.log_factor = arg > 1.0 ? std::log(arg) : 0.0;
        cell.nk = cell.core * cell.log_factor;
        if (mode == SigmaMode::adaptive) {
          const double lip = lipschitz_constants(rc).L * (pb ? rc.L_mu : 1.0);
          cell.sigma = lip > 0.0 ? sigma_adaptive(q.epsilon, lip, dim) : 0.0;
        } else {
          cell.sigma = q.sigma;
        }
        cell.exp_eps = cell.expr.dominant_exponent(EPS);
        cell.exp_H = cell.expr.dominant_exponent(H);
        cell.exp_d = cell.expr.dominant_exponent(D);
        cell.exp_sigma = cell.expr.dominant_exponent(SIGMA);
        out.push_back(std::move(cell));
      }
    }
  }
  return out;
}

}  // namespace wnpg
