#pragma once

// Problem definitions, functional evaluation, first and second variations,
// Euler-Lagrange residual systems and the Du Bois-Reymond variations.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fvc/chebyshev.hpp"
#include "fvc/errors.hpp"
#include "fvc/expr.hpp"
#include "fvc/fracops.hpp"
#include "fvc/linalg.hpp"
#include "fvc/quadrature.hpp"
#include "fvc/special.hpp"

namespace fvc {

enum class Variant { Simplest, FreeInitial, Bolza, FreeFinal };
enum class Regime { CaseOne, CaseTwo };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Simplest:
      return "Simplest";
    case Variant::FreeInitial:
      return "FreeInitial";
    case Variant::Bolza:
      return "Bolza";
    case Variant::FreeFinal:
      return "FreeFinal";
  }
  return "?";
}

inline const char* to_string(Regime r) { return r == Regime::CaseOne ? "CaseOne" : "CaseTwo"; }

inline std::optional<Variant> parse_variant(const std::string& s) {
  for (Variant v : {Variant::Simplest, Variant::FreeInitial, Variant::Bolza, Variant::FreeFinal})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

/// beta > alpha is CaseOne; beta <= alpha (including equality) is CaseTwo.
inline Regime regime_of(double alpha, double beta) { return beta > alpha ? Regime::CaseOne : Regime::CaseTwo; }

inline constexpr double kAdmissibilityTol = 1e-8;

struct ProblemSpec {
  Variant variant = Variant::Simplest;
  double alpha = 1.0;
  double beta = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t n = 1;
  Expr lagrangian;
  std::optional<Expr> terminant;
  std::optional<Vec> x0_fixed;
  std::optional<Vec> x1_fixed;

  Regime regime() const { return regime_of(alpha, beta); }

  bool initial_fixed() const { return variant == Variant::Simplest || variant == Variant::FreeFinal; }
  bool final_fixed() const { return variant == Variant::Simplest || variant == Variant::FreeInitial; }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("problem: alpha must lie in (0,1]");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("problem: beta must be positive");
    if (!(t0 < t1)) throw DomainError("problem: need t0 < t1");
    if (n == 0) throw DimensionError("problem: state dimension must be positive");
    if (lagrangian.empty()) throw DomainError("problem: missing lagrangian");
    if (lagrangian.dim() != n) throw DimensionError("problem: lagrangian parsed for another dimension");
    if (lagrangian.uses(VarKind::A) || lagrangian.uses(VarKind::B))
      throw DomainError("problem: lagrangian may only use t, x and y");
    if (terminant) {
      if (terminant->dim() != n) throw DimensionError("problem: terminant parsed for another dimension");
      if (terminant->uses(VarKind::X) || terminant->uses(VarKind::Y) || terminant->uses(VarKind::T))
        throw DomainError("problem: terminant may only use a and b");
    }
    if (x0_fixed && x0_fixed->size() != n) throw DimensionError("problem: x0 has the wrong dimension");
    if (x1_fixed && x1_fixed->size() != n) throw DimensionError("problem: x1 has the wrong dimension");
    switch (variant) {
      case Variant::Simplest:
        if (!x0_fixed || !x1_fixed) throw DomainError("problem: Simplest needs x0 and x1");
        if (terminant) throw DomainError("problem: Simplest takes no terminant");
        break;
      case Variant::FreeInitial:
        if (!x1_fixed) throw DomainError("problem: FreeInitial needs x1");
        if (x0_fixed) throw DomainError("problem: FreeInitial leaves x0 free");
        if (terminant && terminant->uses(VarKind::B)) throw DomainError("problem: FreeInitial terminant depends on a only");
        break;
      case Variant::Bolza:
        if (x0_fixed || x1_fixed) throw DomainError("problem: Bolza leaves both endpoints free");
        break;
      case Variant::FreeFinal:
        if (!x0_fixed) throw DomainError("problem: FreeFinal needs x0");
        if (x1_fixed) throw DomainError("problem: FreeFinal leaves x1 free");
        if (terminant && terminant->uses(VarKind::A)) throw DomainError("problem: FreeFinal terminant depends on b only");
        break;
    }
  }
};

struct TerminantPartials {
  double value = 0.0;
  Vec la, lb;
  Matrix laa, lab, lbb;
};

inline TerminantPartials terminant_at(const ProblemSpec& p, std::span<const double> a, std::span<const double> b) {
  const std::size_t n = p.n;
  if (!p.terminant) return {0.0, Vec(n, 0.0), Vec(n, 0.0), Matrix(n, n), Matrix(n, n), Matrix(n, n)};
  Jet2Result j = eval_terminant_jet(*p.terminant, a, b);
  return {j.value, std::move(j.grad_x), std::move(j.grad_y), j.H_xx.symmetrized(), std::move(j.H_xy),
          j.H_yy.symmetrized()};
}

namespace detail {

inline bool close(double v, double target) { return std::abs(v - target) <= kAdmissibilityTol * (1.0 + std::abs(target)); }

inline void check_shape(const ProblemSpec& p, const CalphaFunction& x, const char* who) {
  const double tol = 1e-12 * (p.t1 - p.t0);
  if (std::abs(x.t0() - p.t0) > tol || std::abs(x.t1() - p.t1) > tol)
    throw AdmissibilityError(std::string(who) + ": trajectory interval differs from the problem");
  if (std::abs(x.alpha() - p.alpha) > 1e-12) throw AdmissibilityError(std::string(who) + ": trajectory order differs");
  if (x.dim() != p.n) throw DimensionError(std::string(who) + ": trajectory dimension differs");
}

inline void merge_points(std::vector<double>& into, const std::vector<double>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

/// Rule for int_t0^t1 (t1-t)^(beta-1) g(t) dt along one or two trajectories.
inline CompositeRule outer_rule(const ProblemSpec& p, const CalphaFunction& x, const CalphaFunction* h, int n) {
  KernelSpec k;
  k.c = p.t0;
  k.d = p.t1;
  k.right_point = p.t1;
  k.right_exp = p.beta - 1.0;
  k.grade_points = {p.t0, p.t1};
  k.breaks = x.breaks();
  if (h) merge_points(k.breaks, h->breaks());
  k.n = n;
  return composite_rule(k);
}

inline Matrix scaled(const Matrix& m, double s) {
  Matrix r = m;
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) *= s;
  return r;
}

}  // namespace detail

/// Throws AdmissibilityError unless x matches p and its fixed endpoint data.
inline void check_admissible(const ProblemSpec& p, const CalphaFunction& x, int n_quad = kDefaultQuadN) {
  detail::check_shape(p, x, "admissibility");
  if (p.x0_fixed)
    for (std::size_t i = 0; i < p.n; ++i)
      if (!detail::close(x.x0()[i], (*p.x0_fixed)[i])) throw AdmissibilityError("trajectory violates x(t0) = x0");
  if (p.x1_fixed) {
    const Vec end = evaluate(x, p.t1, n_quad);
    for (std::size_t i = 0; i < p.n; ++i)
      if (!detail::close(end[i], (*p.x1_fixed)[i])) throw AdmissibilityError("trajectory violates x(t1) = x1");
  }
}

/// Variations must vanish wherever the variant fixes an endpoint.
inline void check_variation(const ProblemSpec& p, const CalphaFunction& h, int n_quad = kDefaultQuadN) {
  detail::check_shape(p, h, "variation");
  if (p.initial_fixed())
    for (double v : h.x0())
      if (!detail::close(v, 0.0)) throw AdmissibilityError("variation must vanish at t0");
  if (p.final_fixed()) {
    const Vec end = evaluate(h, p.t1, n_quad);
    for (double v : end)
      if (!detail::close(v, 0.0)) throw AdmissibilityError("variation must vanish at t1");
  }
}

/// J(x) = int (t1-t)^(beta-1) L(t, x, cD x) dt + l(x(t0), x(t1)).
inline double evaluate_functional(const ProblemSpec& p, const CalphaFunction& x, int n_quad = kDefaultQuadN) {
  check_admissible(p, x, n_quad);
  const CompositeRule rule = detail::outer_rule(p, x, nullptr, n_quad);
  double j = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const Vec xv = evaluate(x, t, n_quad);
    const Vec yv = x.psi(t);
    j += rule.weights[i] * eval(p.lagrangian, t, xv, yv);
  }
  if (p.terminant) {
    const Vec a = x.x0();
    const Vec b = evaluate(x, p.t1, n_quad);
    j += eval(*p.terminant, 0.0, {}, {}, a, b);
  }
  return j;
}

/// d/dλ J(x + λ h) at λ = 0.
inline double first_variation(const ProblemSpec& p, const CalphaFunction& x, const CalphaFunction& h,
                              int n_quad = kDefaultQuadN) {
  check_admissible(p, x, n_quad);
  check_variation(p, h, n_quad);
  const CompositeRule rule = detail::outer_rule(p, x, &h, n_quad);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const Jet2Result j = eval_jet2(p.lagrangian, t, evaluate(x, t, n_quad), x.psi(t));
    const Vec hv = evaluate(h, t, n_quad);
    const Vec gv = h.psi(t);
    s += rule.weights[i] * (dot(j.grad_x, hv) + dot(j.grad_y, gv));
  }
  if (p.terminant) {
    const Vec h1 = evaluate(h, p.t1, n_quad);
    const TerminantPartials tp = terminant_at(p, x.x0(), evaluate(x, p.t1, n_quad));
    s += dot(tp.la, h.x0()) + dot(tp.lb, h1);
  }
  return s;
}

/// d²/dλ² J(x + λ h) at λ = 0.
inline double second_variation(const ProblemSpec& p, const CalphaFunction& x, const CalphaFunction& h,
                               int n_quad = kDefaultQuadN) {
  check_admissible(p, x, n_quad);
  check_variation(p, h, n_quad);
  const CompositeRule rule = detail::outer_rule(p, x, &h, n_quad);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const Jet2Result j = eval_jet2(p.lagrangian, t, evaluate(x, t, n_quad), x.psi(t));
    const Vec hv = evaluate(h, t, n_quad);
    const Vec gv = h.psi(t);
    s += rule.weights[i] * (bilinear(j.H_yy, gv, gv) + 2.0 * bilinear(j.H_xy, gv, hv) + bilinear(j.H_xx, hv, hv));
  }
  if (p.terminant) {
    const Vec h1 = evaluate(h, p.t1, n_quad);
    const TerminantPartials tp = terminant_at(p, x.x0(), evaluate(x, p.t1, n_quad));
    s += bilinear(tp.laa, h.x0(), h.x0()) + 2.0 * bilinear(tp.lab, h1, h.x0()) + bilinear(tp.lbb, h1, h1);
  }
  return s;
}

/// f(t) = (t1-t)^(1-beta) (I^alpha_{t1-} b)(t) + a1(t) with b = (t1-t)^(beta-1) a0.
template <class A0, class A1>
Vec lemma33_function(A0&& a0, A1&& a1, const ProblemSpec& p, double t, int n_quad = kDefaultQuadN) {
  if (t < p.t0 || t > p.t1) throw DomainError("lemma33_function: t outside [t0,t1]");
  Vec s = s_operator_vec(a0, p.n, p.alpha, p.beta, p.t0, p.t1, t, n_quad);
  const Vec v1 = a1(t);
  for (std::size_t i = 0; i < p.n; ++i) s[i] += v1[i];
  return s;
}

struct NamedDefect {
  std::string name;
  Vec value;
};

struct ElReport {
  Regime regime = Regime::CaseTwo;
  std::string note;  // "ALPHA_EQUALS_BETA" on the regime boundary
  Vec node_ts;
  std::vector<Vec> residual_el;
  Vec inferred_k;
  double k_fit_residual = 0.0;
  std::vector<NamedDefect> residual_transversality;
  double max_abs = 0.0;
};

inline constexpr int kDefaultNodes = 33;

/// L_x and L_y along a trajectory.
class PartialsAlong {
 public:
  PartialsAlong(const ProblemSpec& p, const CalphaFunction& x, int n_quad)
      : p_(p), x_(x), n_quad_(n_quad), x_free_(partials_free_of_x(p.lagrangian)) {}

  Jet2Result at(double t) const {
    const Vec xv = x_free_ ? Vec(p_.n, 0.0) : evaluate(x_, t, n_quad_);
    return eval_jet2(p_.lagrangian, t, xv, x_.psi(t));
  }

  Vec lx(double t) const { return at(t).grad_x; }
  Vec ly(double t) const { return at(t).grad_y; }

 private:
  const ProblemSpec& p_;
  const CalphaFunction& x_;
  int n_quad_;
  bool x_free_;
};

/// Residuals of the variant's Euler-Lagrange system at interior Chebyshev nodes.
inline ElReport el_residual(const ProblemSpec& p, const CalphaFunction& x, int n_nodes = kDefaultNodes,
                            int n_quad = kDefaultQuadN) {
  p.validate();
  check_admissible(p, x, n_quad);
  if (n_nodes < 1) throw LimitError("el_residual: need at least one node");
  const std::size_t n = p.n;
  const PartialsAlong along(p, x, n_quad);
  ElReport rep;
  rep.regime = p.regime();
  if (p.alpha == p.beta) rep.note = "ALPHA_EQUALS_BETA";
  rep.node_ts = chebyshev_interior(static_cast<std::size_t>(n_nodes), p.t0, p.t1);

  // S(L_x) + L_y at every node
  std::vector<Vec> base(rep.node_ts.size());
  for (std::size_t i = 0; i < rep.node_ts.size(); ++i) {
    const double t = rep.node_ts[i];
    base[i] = lemma33_function([&](double tau) { return along.lx(tau); }, [&](double tau) { return along.ly(tau); }, p,
                               t, n_quad);
  }

  const bool has_initial_defect = p.variant == Variant::FreeInitial || p.variant == Variant::Bolza;
  const bool has_final_defect = p.variant == Variant::Bolza || p.variant == Variant::FreeFinal;
  Vec lx_int(n, 0.0);
  if (has_initial_defect) {
    const CompositeRule rule = detail::outer_rule(p, x, nullptr, n_quad);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Vec lx = along.lx(rule.nodes[i]);
      for (std::size_t c = 0; c < n; ++c) lx_int[c] += rule.weights[i] * lx[c];
    }
  }
  TerminantPartials tp;
  if (p.terminant)
    tp = terminant_at(p, x.x0(), evaluate(x, p.t1, n_quad));
  else
    tp = terminant_at(p, Vec(n, 0.0), Vec(n, 0.0));

  rep.inferred_k.assign(n, 0.0);
  rep.residual_el.assign(rep.node_ts.size(), Vec(n, 0.0));
  const double ga = gamma(p.alpha);
  std::vector<double> w(rep.node_ts.size()), phi(rep.node_ts.size());
  for (std::size_t i = 0; i < rep.node_ts.size(); ++i) {
    const double gap = p.t1 - rep.node_ts[i];
    w[i] = std::pow(gap, p.beta - 1.0);
    phi[i] = std::pow(gap, p.alpha - p.beta) / ga;
  }

  if (rep.regime == Regime::CaseOne) {
    for (std::size_t i = 0; i < rep.node_ts.size(); ++i) {
      const double f = std::pow(p.t1 - rep.node_ts[i], p.beta - p.alpha);
      for (std::size_t c = 0; c < n; ++c) rep.residual_el[i][c] = f * base[i][c];
    }
    if (has_initial_defect) {
      Vec d(n);
      for (std::size_t c = 0; c < n; ++c) d[c] = lx_int[c] + tp.la[c];
      rep.residual_transversality.push_back({"INTEGRAL_LX_PLUS_LX0", d});
    }
    if (has_final_defect) rep.residual_transversality.push_back({"LX1_ZERO", tp.lb});
  } else {
    // residual = base - kappa phi with kappa per component
    Vec kappa(n, 0.0);
    if (p.variant == Variant::Simplest || p.variant == Variant::FreeInitial) {
      for (std::size_t c = 0; c < n; ++c) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < rep.node_ts.size(); ++i) {
          num += w[i] * phi[i] * base[i][c];
          den += w[i] * phi[i] * phi[i];
        }
        kappa[c] = num / den;
      }
      for (std::size_t c = 0; c < n; ++c) rep.inferred_k[c] = p.variant == Variant::Simplest ? kappa[c] : -kappa[c];
    } else {
      for (std::size_t c = 0; c < n; ++c) {
        kappa[c] = -tp.lb[c];
        rep.inferred_k[c] = -tp.lb[c];
      }
    }
    double wr = 0.0, ws = 0.0;
    for (std::size_t i = 0; i < rep.node_ts.size(); ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        rep.residual_el[i][c] = base[i][c] - kappa[c] * phi[i];
        wr += w[i] * rep.residual_el[i][c] * rep.residual_el[i][c];
      }
      ws += w[i];
    }
    rep.k_fit_residual = std::sqrt(wr / ws);
    if (p.variant == Variant::FreeInitial) {
      Vec d(n);
      for (std::size_t c = 0; c < n; ++c) d[c] = lx_int[c] + tp.la[c] + rep.inferred_k[c];
      rep.residual_transversality.push_back({"INTEGRAL_LX_PLUS_LX0_PLUS_K", d});
    } else if (p.variant == Variant::Bolza) {
      Vec d(n);
      for (std::size_t c = 0; c < n; ++c) d[c] = lx_int[c] + tp.la[c] + tp.lb[c];
      rep.residual_transversality.push_back({"INTEGRAL_LX_PLUS_LX0_PLUS_LX1", d});
    }
  }

  for (const Vec& r : rep.residual_el) rep.max_abs = std::max(rep.max_abs, norm_inf(r));
  for (const NamedDefect& d : rep.residual_transversality) rep.max_abs = std::max(rep.max_abs, norm_inf(d.value));
  return rep;
}

struct DuboisVariation {
  CalphaFunction h;
  double k_const = 0.0;
  Regime regime = Regime::CaseTwo;
};

/// The variation built in the proof of the fractional Du Bois-Reymond lemma.
/// h(t0) = 0 and h(t1) = 0 by construction.
template <class F>
DuboisVariation dubois_variation(F&& f, double alpha, double beta, double t0, double t1, int n_quad = kDefaultQuadN) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0) || !(t0 < t1)) throw DomainError("dubois_variation: bad orders");
  const ScalarFn fn = f;
  KernelSpec k;
  k.c = t0;
  k.d = t1;
  k.right_point = t1;
  k.grade_points = {t0, t1};
  k.n = n_quad;
  const double len = t1 - t0;
  const double ga = gamma(alpha);
  DuboisVariation out;
  out.regime = regime_of(alpha, beta);
  if (out.regime == Regime::CaseOne) {
    k.right_exp = beta - 1.0;
    const double integral = composite_rule(k).integrate(fn);
    const double k0 = gamma(alpha + 1.0) / std::pow(len, alpha) * integral;
    out.k_const = k0;
    out.h = CalphaFunction::scalar(t0, t1, alpha, 0.0, [=](double t) {
      return ga * std::pow(t1 - t, beta - alpha) * fn(t) - k0;
    });
  } else {
    k.right_exp = alpha - 1.0;
    const double integral = composite_rule(k).integrate(fn);
    const double kk = (2.0 * alpha - beta) * ga / std::pow(len, 2.0 * alpha - beta) * integral;
    out.k_const = kk;
    out.h = CalphaFunction::scalar(t0, t1, alpha, 0.0, [=](double t) {
      return fn(t) - kk * std::pow(t1 - t, alpha - beta) / ga;
    });
  }
  return out;
}

/// int_t0^t1 (t1-t)^(beta-1) f(t) cD^alpha h(t) dt, the pairing the lemma says vanishes.
template <class F>
double dubois_pairing(F&& f, const CalphaFunction& h, double beta, int n_quad = kDefaultQuadN) {
  KernelSpec k;
  k.c = h.t0();
  k.d = h.t1();
  k.right_point = h.t1();
  k.right_exp = beta - 1.0;
  k.grade_points = {h.t0(), h.t1()};
  k.breaks = h.breaks();
  k.n = n_quad;
  const CompositeRule rule = composite_rule(k);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]) * h.psi(rule.nodes[i])[0];
  return s;
}

}  // namespace fvc
