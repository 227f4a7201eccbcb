#pragma once

// Second-order forward-mode numbers: value, gradient and packed symmetric
// Hessian over a fixed set of slots.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace fvc {

struct Jet2 {
  double v = 0.0;
  std::vector<double> g;  // empty means all zero
  std::vector<double> h;  // packed upper triangle, empty means all zero

  static Jet2 constant(double value) { return Jet2{value, {}, {}}; }

  static Jet2 variable(double value, std::size_t slot, std::size_t slots) {
    Jet2 j{value, std::vector<double>(slots, 0.0), {}};
    j.g[slot] = 1.0;
    return j;
  }

  bool is_constant() const noexcept { return g.empty() && h.empty(); }

  static std::size_t index(std::size_t i, std::size_t j, std::size_t k) {
    if (i > j) std::swap(i, j);
    return i * (2 * k - i + 1) / 2 + (j - i);
  }

  double grad(std::size_t i) const { return g.empty() ? 0.0 : g[i]; }
  double hess(std::size_t i, std::size_t j, std::size_t k) const { return h.empty() ? 0.0 : h[index(i, j, k)]; }
  bool finite() const {
    if (!std::isfinite(v)) return false;
    for (double x : g)
      if (!std::isfinite(x)) return false;
    for (double x : h)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

namespace jet {

inline std::size_t packed_size(std::size_t k) { return k * (k + 1) / 2; }

/// Combination c_a * a + c_b * b for derivative parts; value supplied separately.
inline Jet2 linear(double value, const Jet2& a, double ca, const Jet2& b, double cb, std::size_t k) {
  Jet2 r{value, {}, {}};
  if (!a.g.empty() || !b.g.empty()) {
    r.g.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) r.g[i] = ca * a.grad(i) + cb * b.grad(i);
  }
  if (!a.h.empty() || !b.h.empty()) {
    r.h.assign(packed_size(k), 0.0);
    for (std::size_t i = 0; i < r.h.size(); ++i)
      r.h[i] = (a.h.empty() ? 0.0 : ca * a.h[i]) + (b.h.empty() ? 0.0 : cb * b.h[i]);
  }
  return r;
}

inline Jet2 mul(double value, const Jet2& a, const Jet2& b, std::size_t k) {
  Jet2 r{value, {}, {}};
  if (a.is_constant() && b.is_constant()) return r;
  r.g.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    if (a.grad(i) != 0.0) s += b.v * a.grad(i);
    if (b.grad(i) != 0.0) s += a.v * b.grad(i);
    r.g[i] = s;
  }
  r.h.assign(packed_size(k), 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      const double bij = b.hess(i, j, k), aij = a.hess(i, j, k);
      if (bij != 0.0) s += a.v * bij;
      if (aij != 0.0) s += b.v * aij;
      s += a.grad(i) * b.grad(j) + a.grad(j) * b.grad(i);
      r.h[Jet2::index(i, j, k)] = s;
    }
  return r;
}

/// q = a / b with q supplied so the value path matches plain division.
inline Jet2 div(double q, const Jet2& a, const Jet2& b, std::size_t k) {
  Jet2 r{q, {}, {}};
  if (a.is_constant() && b.is_constant()) return r;
  r.g.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = a.grad(i);
    if (b.grad(i) != 0.0) s -= q * b.grad(i);
    r.g[i] = s / b.v;
  }
  r.h.assign(packed_size(k), 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double s = a.hess(i, j, k);
      const double bij = b.hess(i, j, k);
      if (bij != 0.0) s -= q * bij;
      s -= r.g[i] * b.grad(j) + r.g[j] * b.grad(i);
      r.h[Jet2::index(i, j, k)] = s / b.v;
    }
  return r;
}

/// f(u) given f(u.v), f'(u.v), f''(u.v). Terms whose slot factor is zero are
/// skipped so an infinite derivative never meets a zero.
inline Jet2 unary(const Jet2& u, double f0, double f1, double f2, std::size_t k) {
  Jet2 r{f0, {}, {}};
  if (u.is_constant()) return r;
  r.g.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    if (u.grad(i) != 0.0) r.g[i] = f1 * u.grad(i);
  r.h.assign(packed_size(k), 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      const double uij = u.hess(i, j, k);
      if (uij != 0.0) s += f1 * uij;
      const double uu = u.grad(i) * u.grad(j);
      if (uu != 0.0) s += f2 * uu;
      r.h[Jet2::index(i, j, k)] = s;
    }
  return r;
}

}  // namespace jet
}  // namespace fvc
