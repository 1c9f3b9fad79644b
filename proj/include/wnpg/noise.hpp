// White-noise distributions on R^d: zero mean, E||eps||^2 <= d * sigma^2.
//
// Two kinds are supported. The isotropic Gaussian N(0, sigma^2 I) is the
// exploration noise for both action-based and parameter-based learning and
// has a closed-form score. The uniform hypercube draws each coordinate from
// Uni([-sqrt(3) sigma, +sqrt(3) sigma]) so that its per-coordinate variance is
// exactly sigma^2; its density is not differentiable, so it is sampling-only
// and serves the deployment-gap tightness study.

#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "wnpg/core.hpp"

namespace wnpg {

enum class NoiseKind { gaussian, uniform };

inline std::string_view to_string(NoiseKind k) {
  return k == NoiseKind::gaussian ? "gaussian" : "uniform";
}

inline NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "uniform") return NoiseKind::uniform;
  throw Error("unknown noise kind '" + std::string(s) + "' (expected gaussian|uniform)");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  std::size_t dim = 1;
  double sigma = 0.0;

  void validate() const {
    require(dim >= 1, "noise: dim must be >= 1");
    require(std::isfinite(sigma) && sigma >= 0.0, "noise: sigma must be finite and >= 0");
  }
};

/// One draw. sigma == 0 returns the zero vector without touching the generator.
inline Vec sample(const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  Vec eps(noise.dim, 0.0);
  if (noise.sigma == 0.0) return eps;
  if (noise.kind == NoiseKind::gaussian) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (double& e : eps) e = noise.sigma * z(rng);
  } else {
    const double half_width = std::sqrt(3.0) * noise.sigma;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& e : eps) e = half_width * u(rng);
  }
  return eps;
}

namespace detail {
inline void require_gaussian_score(const NoiseSpec& noise) {
  require(noise.kind == NoiseKind::gaussian,
          "noise: score is undefined for uniform noise (non-differentiable density)");
  require(noise.sigma > 0.0, "noise: score requires sigma > 0");
}
}  // namespace detail

/// grad_eps log phi(eps) = -eps / sigma^2 for the isotropic Gaussian.
inline Vec score_gradient(const NoiseSpec& noise, std::span<const double> eps) {
  detail::require_gaussian_score(noise);
  require_dim(eps.size(), noise.dim, "score_gradient");
  const double inv_var = 1.0 / (noise.sigma * noise.sigma);
  Vec g(eps.begin(), eps.end());
  for (double& v : g) v *= -inv_var;
  return g;
}

/// log phi(eps) of the isotropic Gaussian, including the normalizer.
inline double log_density(const NoiseSpec& noise, std::span<const double> eps) {
  detail::require_gaussian_score(noise);
  require_dim(eps.size(), noise.dim, "log_density");
  const double var = noise.sigma * noise.sigma;
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  return -0.5 * squared_norm(eps) / var -
         0.5 * static_cast<double>(noise.dim) * (kLog2Pi + std::log(var));
}

/// E||grad log phi||^2 = d / sigma^2 (score constant c = 1).
inline double score_second_moment_analytic(const NoiseSpec& noise) {
  detail::require_gaussian_score(noise);
  return static_cast<double>(noise.dim) / (noise.sigma * noise.sigma);
}

struct MomentReport {
  double mean_norm = 0.0;     // ||empirical mean||
  double mean_sq_norm = 0.0;  // empirical E||eps||^2
  double bound = 0.0;         // d * sigma^2
  std::size_t n = 0;

  /// The acceptance rule callers are expected to apply.
  bool within_tolerance(double sigma, std::size_t dim) const {
    const double sn = std::sqrt(static_cast<double>(n));
    return mean_sq_norm <= bound * (1.0 + 5.0 / sn) &&
           mean_norm <= 5.0 * sigma * std::sqrt(static_cast<double>(dim) / static_cast<double>(n));
  }
};

inline MomentReport empirical_moment_check(const NoiseSpec& noise, std::size_t n, Rng& rng) {
  require(n >= 1000, "empirical_moment_check: n must be >= 1000");
  Vec sum(noise.dim, 0.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec eps = sample(noise, rng);
    axpy(1.0, eps, sum);
    sq += squared_norm(eps);
  }
  for (double& s : sum) s /= static_cast<double>(n);
  MomentReport r;
  r.mean_norm = norm(sum);
  r.mean_sq_norm = sq / static_cast<double>(n);
  r.bound = static_cast<double>(noise.dim) * noise.sigma * noise.sigma;
  r.n = n;
  return r;
}

}  // namespace wnpg
