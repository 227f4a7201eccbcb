#pragma once

// Reference computations for tests. Nothing here reuses the library's
// quadrature, so agreement is a genuine cross-check.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "fvc/expr.hpp"
#include "fvc/variational.hpp"

namespace oracle {

/// Double-exponential (tanh-sinh) rule on [a,b]. The integrand receives the
/// point plus its exact distances to both ends, so weights like (b-x)^p can be
/// formed without cancellation.
inline double tanh_sinh(const std::function<double(double, double, double)>& f, double a, double b,
                        double h = 1.0 / 64.0) {
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int k = -static_cast<int>(6.0 / h); k <= static_cast<int>(6.0 / h); ++k) {
    const double s = k * h;
    const double u = 0.5 * M_PI * std::sinh(s);
    const double ch = std::cosh(u);
    const double w = 0.5 * M_PI * std::cosh(s) / (ch * ch);
    // distances to the ends: half * (1 + tanh u) and half * (1 - tanh u)
    const double da = half * 2.0 / (1.0 + std::exp(-2.0 * u));
    const double db = half * 2.0 / (1.0 + std::exp(2.0 * u));
    if (da <= 0.0 || db <= 0.0 || w < 1e-300) continue;
    const double x = u < 0 ? a + da : b - db;
    const double v = f(x, da, db);
    if (std::isfinite(v)) sum += w * v;
  }
  return half * h * sum;
}

/// int_a^b f(x) dx for a smooth integrand.
inline double integral(const std::function<double(double)>& f, double a, double b) {
  return tanh_sinh([&](double x, double, double) { return f(x); }, a, b);
}

/// Left Riemann-Liouville integral of order alpha at t.
inline double rl_left(const std::function<double(double)>& f, double alpha, double t0, double t) {
  if (t <= t0) return 0.0;
  return tanh_sinh([&](double x, double, double db) { return std::pow(db, alpha - 1.0) * f(x); }, t0, t) /
         std::tgamma(alpha);
}

/// (t1 - t)^(1-beta)/Gamma(alpha) int_t^t1 (t1-tau)^(beta-1) (tau-t)^(alpha-1) a(tau) dtau.
inline double s_op(const std::function<double(double)>& a, double alpha, double beta, double t1, double t) {
  const double v = tanh_sinh(
      [&](double x, double da, double db) { return std::pow(db, beta - 1.0) * std::pow(da, alpha - 1.0) * a(x); }, t,
      t1);
  return std::pow(t1 - t, 1.0 - beta) * v / std::tgamma(alpha);
}

/// Extremal of the fixed-end y^2 problem: (2a-b) int_0^t (t-tau)^(a-1) (1-tau)^(a-b) dtau.
inline double fixed_ends(double alpha, double beta, double t) {
  if (t <= 0.0) return 0.0;
  return (2.0 * alpha - beta) *
         tanh_sinh([&](double x, double, double db) { return std::pow(db, alpha - 1.0) * std::pow(1.0 - x, alpha - beta); },
                   0.0, t);
}

inline fvc::ProblemSpec problem(fvc::Variant v, double alpha, double beta, const std::string& lagr,
                                std::optional<std::string> term = std::nullopt, std::optional<double> x0 = std::nullopt,
                                std::optional<double> x1 = std::nullopt, double t0 = 0.0, double t1 = 1.0) {
  fvc::ProblemSpec p;
  p.variant = v;
  p.alpha = alpha;
  p.beta = beta;
  p.t0 = t0;
  p.t1 = t1;
  p.n = 1;
  p.lagrangian = fvc::parse(lagr, 1);
  if (term) p.terminant = fvc::parse(*term, 1);
  if (x0) p.x0_fixed = fvc::Vec{*x0};
  if (x1) p.x1_fixed = fvc::Vec{*x1};
  return p;
}

inline fvc::ProblemSpec fixed_ends_problem(double alpha, double beta) {
  return problem(fvc::Variant::Simplest, alpha, beta, "y1^2", std::nullopt, 0.0, 1.0);
}

inline fvc::ProblemSpec free_start_problem(double alpha, double beta) {
  return problem(fvc::Variant::FreeInitial, alpha, beta, "y1^2", std::string("a1^2"), std::nullopt, 1.0);
}

inline fvc::ProblemSpec bolza_quadratic_problem(double alpha, double beta) {
  return problem(fvc::Variant::Bolza, alpha, beta, "y1^2", std::string("a1^2 + b1^2"));
}

inline fvc::ProblemSpec bolza_linear_problem(double alpha, double beta) {
  return problem(fvc::Variant::Bolza, alpha, beta, "x1 + y1^2", std::string("a1^2"));
}

/// Extremal of the Bolza problem x + y^2 with cost a^2: -1/(2b) - Gamma(b)/(2 Gamma(a) Gamma(a+b)) int_0^t (t-tau)^(a-1) (1-tau)^a dtau.
inline double bolza_linear(double alpha, double beta, double t) {
  const double c = std::tgamma(beta) / (2.0 * std::tgamma(alpha) * std::tgamma(alpha + beta));
  const double v = t <= 0.0 ? 0.0
                            : tanh_sinh([&](double x, double, double db) {
                                return std::pow(db, alpha - 1.0) * std::pow(1.0 - x, alpha);
                              }, 0.0, t);
  return -0.5 / beta - c * v;
}

}  // namespace oracle
