#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "fvc/errors.hpp"

namespace fvc {

namespace detail {

inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Lanczos series for x >= 0.5, returns Gamma(x).
inline double lanczos_gamma(double x) {
  const double z = x - 1.0;
  double a = kLanczosCoef[0];
  for (int i = 1; i < 9; ++i) a += kLanczosCoef[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  // split the power so t^(z+0.5) cannot overflow before the exp() shrinks it
  const double half = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * a;
}

inline double lanczos_log_gamma(double x) {
  const double z = x - 1.0;
  double a = kLanczosCoef[0];
  for (int i = 1; i < 9; ++i) a += kLanczosCoef[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

inline void require_positive(double x, const char* who) {
  if (!std::isfinite(x) || x <= 0.0) throw DomainError(std::string(who) + ": argument must be positive and finite");
}

}  // namespace detail

/// Gamma function on the positive real axis.
inline double gamma(double x) {
  detail::require_positive(x, "gamma");
  if (x == std::floor(x) && x <= 171.0) {
    double f = 1.0;
    for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
    return f;
  }
  if (x < 0.5) return detail::lanczos_gamma(x + 1.0) / x;
  return detail::lanczos_gamma(x);
}

inline double log_gamma(double x) {
  detail::require_positive(x, "log_gamma");
  if (x < 0.5) return detail::lanczos_log_gamma(x + 1.0) - std::log(x);
  return detail::lanczos_log_gamma(x);
}

/// B(a,b); products and sums below are symmetric in (a,b) bit for bit.
inline double beta(double a, double b) {
  detail::require_positive(a, "beta");
  detail::require_positive(b, "beta");
  if (a + b < 150.0 && std::min(a, b) > 1e-300) return (gamma(a) * gamma(b)) / gamma(a + b);
  const double la = log_gamma(a);
  const double lb = log_gamma(b);
  return std::exp((la + lb) - log_gamma(a + b));
}

/// Returns (lhs, rhs) of (s2^a - s1^a)^2 <= a (s2 - s1)^(a+1) s1^(a-1).
inline std::pair<double, double> power_inequality_gap(double alpha, double sigma1, double sigma2) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("power_inequality_gap: alpha must lie in (0,1]");
  if (!(sigma1 > 0.0 && sigma1 <= sigma2) || !std::isfinite(sigma2))
    throw DomainError("power_inequality_gap: need 0 < sigma1 <= sigma2");
  const double d = std::pow(sigma2, alpha) - std::pow(sigma1, alpha);
  const double lhs = d * d;
  const double rhs = alpha * std::pow(sigma2 - sigma1, alpha + 1.0) * std::pow(sigma1, alpha - 1.0);
  return {lhs, rhs};
}

/// psi(x) = Gamma'(x)/Gamma(x), x > 0.
inline double digamma(double x) {
  detail::require_positive(x, "digamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double series =
      r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12.0))))));
  return acc + std::log(x) - 0.5 / x - series;
}

/// psi'(x), x > 0.
inline double trigamma(double x) {
  detail::require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double series =
      1.0 / x + r / 2.0 +
      (r / x) * (1.0 / 6 - r * (1.0 / 30 - r * (1.0 / 42 - r * (1.0 / 30 - r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6))))));
  return acc + series;
}

}  // namespace fvc
