#pragma once

// Chebyshev point sets on [a,b] and barycentric interpolation.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "fvc/errors.hpp"
#include "fvc/linalg.hpp"

namespace fvc {

/// Chebyshev-Lobatto points on [a,b], m >= 2, increasing, endpoints included.
inline Vec chebyshev_lobatto(std::size_t m, double a, double b) {
  if (m < 2) throw LimitError("chebyshev_lobatto: need at least two points");
  Vec t(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = -std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(m - 1));
    t[j] = a + 0.5 * (b - a) * (1.0 + s);
  }
  t.front() = a;
  t.back() = b;
  return t;
}

/// Chebyshev points of the first kind on (a,b), increasing, endpoints excluded.
inline Vec chebyshev_interior(std::size_t m, double a, double b) {
  Vec t(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = -std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(m));
    t[j] = a + 0.5 * (b - a) * (1.0 + s);
  }
  return t;
}

/// Barycentric interpolant through values at Chebyshev-Lobatto points.
class ChebInterp {
 public:
  ChebInterp() = default;
  ChebInterp(double a, double b, Vec values) : a_(a), b_(b), values_(std::move(values)) {
    const std::size_t m = values_.size();
    if (m < 2) throw LimitError("ChebInterp: need at least two values");
    nodes_ = chebyshev_lobatto(m, a, b);
    weights_.assign(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (j % 2 == 1) weights_[j] = -1.0;
      if (j == 0 || j + 1 == m) weights_[j] *= 0.5;
    }
  }

  template <class F>
  static ChebInterp sample(F&& f, double a, double b, std::size_t m) {
    const Vec t = chebyshev_lobatto(m, a, b);
    Vec v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = f(t[j]);
    return ChebInterp(a, b, std::move(v));
  }

  double operator()(double t) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double diff = t - nodes_[j];
      if (diff == 0.0) return values_[j];
      const double w = weights_[j] / diff;
      num += w * values_[j];
      den += w;
    }
    return num / den;
  }

  /// Lagrange basis values l_j(t); sums to one.
  Vec basis(double t) const {
    const std::size_t m = nodes_.size();
    Vec l(m, 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = t - nodes_[j];
      if (diff == 0.0) {
        l.assign(m, 0.0);
        l[j] = 1.0;
        return l;
      }
      l[j] = weights_[j] / diff;
      den += l[j];
    }
    for (double& v : l) v /= den;
    return l;
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  const Vec& nodes() const noexcept { return nodes_; }
  const Vec& values() const noexcept { return values_; }

 private:
  double a_ = 0.0, b_ = 1.0;
  Vec nodes_, values_, weights_;
};

}  // namespace fvc
