// Shared vocabulary: vectors, generator type, error type and a few
// vector helpers used throughout the library.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnpg {

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

/// Raised on contract violations (bad dimensions, invalid parameters,
/// malformed input). The message names the offending quantity.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                ", expected " + std::to_string(want) + ")");
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_dim(b.size(), a.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_dim(y.size(), x.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Streaming mean and covariance trace over equally sized vectors
/// (Welford's update, coordinate-wise).
class VectorWelford {
 public:
  explicit VectorWelford(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x) {
    require_dim(x.size(), mean_.size(), "VectorWelford::add");
    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / n;
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }

  std::size_t count() const { return count_; }
  const Vec& mean() const { return mean_; }

  /// Sum of unbiased per-coordinate sample variances; 0 for fewer than 2 samples.
  double trace_variance() const {
    if (count_ < 2) return 0.0;
    double s = 0.0;
    for (double v : m2_) s += v;
    return s / static_cast<double>(count_ - 1);
  }

  /// Unbiased sample variances per coordinate.
  Vec variances() const {
    Vec out(m2_.size(), 0.0);
    if (count_ < 2) return out;
    for (std::size_t i = 0; i < m2_.size(); ++i) out[i] = m2_[i] / static_cast<double>(count_ - 1);
    return out;
  }

 private:
  std::size_t count_ = 0;
  Vec mean_;
  Vec m2_;
};

}  // namespace wnpg
