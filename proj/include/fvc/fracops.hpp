#pragma once

// Riemann-Liouville integrals, Caputo derivatives on the (x0, psi)
// representation, and the double-weight S transform.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "fvc/errors.hpp"
#include "fvc/linalg.hpp"
#include "fvc/quadrature.hpp"
#include "fvc/special.hpp"

namespace fvc {

using ScalarFn = std::function<double(double)>;
using VecFn = std::function<Vec(double)>;

/// One smooth piece of the Caputo derivative, valid on [a,b].
struct PsiPanel {
  double a;
  double b;
  VecFn psi;
};

/// x(t) = x0 + (I^alpha psi)(t) with psi continuous on each panel. Panel
/// boundaries listed in `jumps` are discontinuities of psi; other boundaries
/// are only breaks in the representation.
class CalphaFunction {
 public:
  CalphaFunction() = default;

  CalphaFunction(double t0, double t1, double alpha, Vec x0, VecFn psi)
      : CalphaFunction(t0, t1, alpha, std::move(x0), std::vector<PsiPanel>{{t0, t1, std::move(psi)}}, {}) {}

  CalphaFunction(double t0, double t1, double alpha, Vec x0, std::vector<PsiPanel> panels, std::vector<double> jumps)
      : t0_(t0), t1_(t1), alpha_(alpha), x0_(std::move(x0)), panels_(std::move(panels)), jumps_(std::move(jumps)) {
    if (!(t0 < t1)) throw DomainError("CalphaFunction: need t0 < t1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("CalphaFunction: alpha must lie in (0,1]");
    if (x0_.empty()) throw DimensionError("CalphaFunction: empty state");
    if (panels_.empty()) throw DomainError("CalphaFunction: no panels");
    std::sort(panels_.begin(), panels_.end(), [](const PsiPanel& p, const PsiPanel& q) { return p.a < q.a; });
    const double tol = 1e-12 * (t1 - t0);
    if (std::abs(panels_.front().a - t0) > tol || std::abs(panels_.back().b - t1) > tol)
      throw DomainError("CalphaFunction: panels must cover [t0,t1]");
    panels_.front().a = t0;
    panels_.back().b = t1;
    for (std::size_t i = 0; i + 1 < panels_.size(); ++i) {
      if (std::abs(panels_[i].b - panels_[i + 1].a) > tol) throw DomainError("CalphaFunction: panels leave a gap");
      panels_[i + 1].a = panels_[i].b;
      if (!(panels_[i].a < panels_[i].b)) throw DomainError("CalphaFunction: empty panel");
      breaks_.push_back(panels_[i].b);
    }
    std::sort(jumps_.begin(), jumps_.end());
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
      if (!(jumps_[i] > t0 && jumps_[i] < t1)) throw DomainError("CalphaFunction: jump outside (t0,t1)");
      if (i > 0 && !(jumps_[i] > jumps_[i - 1])) throw DomainError("CalphaFunction: jumps must increase");
      const bool on_break = std::any_of(breaks_.begin(), breaks_.end(), [&](double b) { return std::abs(b - jumps_[i]) <= tol; });
      if (!on_break) throw DomainError("CalphaFunction: jump must sit on a panel boundary");
    }
  }

  /// Convenience for scalar trajectories.
  static CalphaFunction scalar(double t0, double t1, double alpha, double x0, ScalarFn psi) {
    return CalphaFunction(t0, t1, alpha, Vec{x0}, [psi = std::move(psi)](double t) { return Vec{psi(t)}; });
  }

  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t dim() const noexcept { return x0_.size(); }
  const Vec& x0() const noexcept { return x0_; }
  const std::vector<PsiPanel>& panels() const noexcept { return panels_; }
  const std::vector<double>& jumps() const noexcept { return jumps_; }
  const std::vector<double>& breaks() const noexcept { return breaks_; }

  bool is_jump(double t) const {
    const double tol = 1e-12 * (t1_ - t0_);
    return std::any_of(jumps_.begin(), jumps_.end(), [&](double j) { return std::abs(j - t) <= tol; });
  }

  /// psi(t); at a panel boundary the left panel is used (left limit).
  Vec psi(double t) const { return panels_[panel_index(t)].psi(t); }

  std::size_t panel_index(double t) const {
    for (std::size_t i = 0; i < panels_.size(); ++i)
      if (t <= panels_[i].b) return i;
    return panels_.size() - 1;
  }

  /// Points where psi may lose smoothness: t1 always, plus every break.
  std::vector<double> grade_points() const {
    std::vector<double> g = breaks_;
    g.push_back(t1_);
    return g;
  }

 private:
  double t0_ = 0.0;
  double t1_ = 1.0;
  double alpha_ = 1.0;
  Vec x0_;
  std::vector<PsiPanel> panels_;
  std::vector<double> jumps_;
  std::vector<double> breaks_;
};

struct CaputoValue {
  Vec value;
  bool at_jump = false;
};

/// Caputo derivative: the stored psi. At a jump the left limit is returned and flagged.
inline CaputoValue caputo_left(const CalphaFunction& x, double t) {
  if (t < x.t0() || t > x.t1()) throw DomainError("caputo_left: t outside [t0,t1]");
  return {x.psi(t), x.is_jump(t)};
}

namespace detail {

/// Composite rule for (t - tau)^(alpha-1) on [t0, t] along x's panels.
inline CompositeRule left_rl_rule(const CalphaFunction& x, double t, int n) {
  KernelSpec k;
  k.c = x.t0();
  k.d = t;
  k.right_point = t;
  k.right_exp = x.alpha() - 1.0;
  k.grade_points = {x.t1()};
  k.breaks = x.breaks();
  k.n = n;
  return composite_rule(k);
}

// psi on the correct panel for a node strictly inside a panel.
inline Vec psi_at_node(const CalphaFunction& x, double tau) { return x.psi(tau); }

}  // namespace detail

/// (I^alpha psi)(t) restricted to the first `dim` components.
inline Vec rl_of_psi(const CalphaFunction& x, double t, int n = kDefaultQuadN) {
  const std::size_t dim = x.dim();
  Vec out(dim, 0.0);
  if (t <= x.t0()) return out;
  const CompositeRule rule = detail::left_rl_rule(x, t, n);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Vec p = detail::psi_at_node(x, rule.nodes[i]);
    for (std::size_t j = 0; j < dim; ++j) out[j] += rule.weights[i] * p[j];
  }
  const double g = gamma(x.alpha());
  for (double& v : out) v /= g;
  return out;
}

/// x(t) = x0 + I^alpha psi.
inline Vec evaluate(const CalphaFunction& x, double t, int n = kDefaultQuadN) {
  if (t < x.t0() - 1e-14 * (x.t1() - x.t0()) || t > x.t1() + 1e-14 * (x.t1() - x.t0()))
    throw DomainError("evaluate: t outside [t0,t1]");
  t = std::clamp(t, x.t0(), x.t1());
  Vec v = x.x0();
  if (t == x.t0()) return v;
  const Vec r = rl_of_psi(x, t, n);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += r[j];
  return v;
}

/// Left Riemann-Liouville integral of a scalar function; f may behave
/// algebraically at t0, which is graded toward.
template <class F>
double rl_integral_left(F&& f, double alpha, double t0, double t, int n = kDefaultQuadN) {
  if (alpha < 0.0) throw DomainError("rl_integral_left: negative order");
  if (t < t0) throw DomainError("rl_integral_left: t before t0");
  if (alpha == 0.0) return f(t);
  if (t == t0) return 0.0;
  KernelSpec k;
  k.c = t0;
  k.d = t;
  k.right_point = t;
  k.right_exp = alpha - 1.0;
  k.grade_points = {t0};
  k.n = n;
  return composite_rule(k).integrate(f) / gamma(alpha);
}

/// Right Riemann-Liouville integral on [t, t1]; f may behave algebraically at t1.
template <class F>
double rl_integral_right(F&& f, double alpha, double t1, double t, int n = kDefaultQuadN) {
  if (alpha < 0.0) throw DomainError("rl_integral_right: negative order");
  if (t > t1) throw DomainError("rl_integral_right: t after t1");
  if (alpha == 0.0) return f(t);
  if (t == t1) return 0.0;
  KernelSpec k;
  k.c = t;
  k.d = t1;
  k.left_point = t;
  k.left_exp = alpha - 1.0;
  k.grade_points = {t1};
  k.n = n;
  return composite_rule(k).integrate(f) / gamma(alpha);
}

struct CompositionReport {
  double structural = 0.0;  // |cD^a (I^a f) - f|
  double quadrature = 0.0;  // |I^a (cD^a x) - (x - x0)| across two resolutions
};

/// Composition identities on [t0,t1] for x = I^alpha f.
template <class F>
CompositionReport composition_residual(F&& f, double alpha, int n, int probe_count, double t0 = 0.0, double t1 = 1.0) {
  const ScalarFn fn = f;
  const CalphaFunction x = CalphaFunction::scalar(t0, t1, alpha, 0.0, fn);
  CompositionReport rep;
  const int n_fine = std::min(2 * n, 512);
  for (int i = 0; i < probe_count; ++i) {
    const double t = probe_count == 1 ? t1 : t0 + (t1 - t0) * i / (probe_count - 1);
    rep.structural = std::max(rep.structural, std::abs(caputo_left(x, t).value[0] - fn(t)));
    const auto cd = [&](double tau) { return caputo_left(x, tau).value[0]; };
    const double lhs = rl_integral_left(cd, alpha, t0, t, n);
    const double rhs = evaluate(x, t, n_fine)[0] - x.x0()[0];
    rep.quadrature = std::max(rep.quadrature, std::abs(lhs - rhs));
  }
  return rep;
}

struct SValue {
  double value = 0.0;
  bool extended = false;  // true when the boundary limit at t1 was returned
};

namespace detail {

inline CompositeRule s_rule(double alpha, double beta, double t0, double t1, double t, int n) {
  KernelSpec k;
  k.c = t;
  k.d = t1;
  k.right_point = t1;
  k.right_exp = beta - 1.0;
  k.left_point = t;
  k.left_exp = alpha - 1.0;
  k.grade_points = {t0, t1};
  k.n = n;
  return composite_rule(k);
}

inline void check_s_args(double alpha, double beta, double t0, double t1, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("s_operator: alpha must lie in (0,1]");
  if (!(beta > 0.0)) throw DomainError("s_operator: beta must be positive");
  if (!(t0 < t1) || t < t0 || t > t1) throw DomainError("s_operator: t outside [t0,t1]");
}

}  // namespace detail

/// (Sa)(t) = (t1-t)^(1-beta)/Gamma(alpha) int_t^t1 (t1-tau)^(beta-1) (tau-t)^(alpha-1) a(tau) dtau.
/// The bound |Sa(t)| <= sup|a| Gamma(beta)/Gamma(alpha+beta) (t1-t)^alpha gives the limit 0 at t1.
template <class F>
SValue s_operator(F&& a, double alpha, double beta, double t0, double t1, double t, int n = kDefaultQuadN) {
  detail::check_s_args(alpha, beta, t0, t1, t);
  if (t1 - t <= 1e-14 * (t1 - t0)) return {0.0, true};
  const CompositeRule rule = detail::s_rule(alpha, beta, t0, t1, t, n);
  const double v = rule.integrate(a);
  return {std::pow(t1 - t, 1.0 - beta) * v / gamma(alpha), false};
}

/// Componentwise S transform of a vector function.
template <class F>
Vec s_operator_vec(F&& a, std::size_t dim, double alpha, double beta, double t0, double t1, double t,
                   int n = kDefaultQuadN) {
  detail::check_s_args(alpha, beta, t0, t1, t);
  Vec out(dim, 0.0);
  if (t1 - t <= 1e-14 * (t1 - t0)) return out;
  const CompositeRule rule = detail::s_rule(alpha, beta, t0, t1, t, n);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Vec v = a(rule.nodes[i]);
    for (std::size_t j = 0; j < dim; ++j) out[j] += rule.weights[i] * v[j];
  }
  const double f = std::pow(t1 - t, 1.0 - beta) / gamma(alpha);
  for (double& v : out) v *= f;
  return out;
}

}  // namespace fvc
