#pragma once

#include <cmath>
#include <utility>

namespace wnpg {

/// Golden-section search for the maximizer of a unimodal f on [lo, hi].
/// Stops when the bracket is narrower than tol. Real may be long double
/// when the objective is flat enough that double comparisons stall.
template <typename Real, typename F>
Real golden_section_maximize(F&& f, Real lo, Real hi, Real tol) {
  const Real inv_phi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
  Real a = lo, b = hi;
  Real c = b - inv_phi * (b - a);
  Real d = a + inv_phi * (b - a);
  Real fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / Real(2);
}

/// sum_{t<T} rho^t
inline double geometric_sum(double rho, long horizon) {
  if (std::abs(1.0 - rho) < 1e-12) return static_cast<double>(horizon);
  return (1.0 - std::pow(rho, static_cast<double>(horizon))) / (1.0 - rho);
}

}  // namespace wnpg
