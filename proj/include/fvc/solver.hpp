#pragma once

// Extremals: closed-form solution of the separable class
//   L = <y, A y> + <c(t), x> + d(t),  A symmetric positive definite,
// and a direct minimizer over discretized Caputo derivatives.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
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
#include "fvc/variational.hpp"

namespace fvc {

enum class SolveStatus { Extremal, NoExtremal, Unsupported };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Extremal:
      return "Extremal";
    case SolveStatus::NoExtremal:
      return "NoExtremal";
    case SolveStatus::Unsupported:
      return "Unsupported";
  }
  return "?";
}

struct SolveOutcome {
  SolveStatus status = SolveStatus::Unsupported;
  Regime regime = Regime::CaseTwo;
  std::optional<CalphaFunction> trajectory;
  Vec k;   // regime constant in the el_residual convention
  Vec x0;  // endpoint values used
  Vec x1;
  std::string diagnosis;
  double J = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // el_residual max_abs
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kExtremalResidualTol = 1e-7;

namespace detail {

/// G(t) with (S c)(t) = (t1 - t)^alpha G(t); G is smooth whenever c is.
class SOfC {
 public:
  SOfC(const ProblemSpec& p, int n_quad) : p_(p), n_(p.n), n_quad_(n_quad) {
    constant_ = !lagrangian_x_coefficients_vary(p.lagrangian);
    if (constant_) {
      c0_ = lx_at(0.5 * (p.t0 + p.t1));
      const double f = gamma(p.beta) / gamma(p.alpha + p.beta);
      g0_ = c0_;
      for (double& v : g0_) v *= f;
      return;
    }
    rule_ = jacobi_rule_shared(n_quad, p.beta - 1.0, p.alpha - 1.0);
    for (std::size_t m : {65u, 129u}) {
      interp_.clear();
      for (std::size_t c = 0; c < n_; ++c)
        interp_.push_back(ChebInterp::sample([&](double t) { return direct(t)[c]; }, p.t0, p.t1, m));
      if (interp_ok()) return;
    }
    interp_.clear();
  }

  Vec G(double t) const {
    if (constant_) return g0_;
    if (interp_.empty()) return direct(t);
    Vec g(n_);
    for (std::size_t c = 0; c < n_; ++c) g[c] = interp_[c](t);
    return g;
  }

  Vec Sc(double t) const {
    Vec g = G(t);
    const double f = std::pow(p_.t1 - t, p_.alpha);
    for (double& v : g) v *= f;
    return g;
  }

  Vec c(double t) const { return lx_at(t); }
  bool zero() const { return !p_.lagrangian.uses(VarKind::X); }

 private:
  ProblemSpec p_;  // copied: trajectories keep this object alive
  std::size_t n_;
  int n_quad_;
  bool constant_ = false;
  Vec c0_, g0_;
  std::shared_ptr<const QuadRule> rule_;
  std::vector<ChebInterp> interp_;

  static bool lagrangian_x_coefficients_vary(const Expr& e) {
    const auto s = analyze_shape(e);
    if (!s) return true;
    const std::size_t n = e.dim();
    for (const auto& [mono, tdep] : s->terms) {
      int dx = 0;
      for (std::size_t i = 0; i < n; ++i) dx += mono[i];
      if (dx == 1 && tdep) return true;
    }
    return false;
  }

  Vec lx_at(double t) const {
    const Vec zero(n_, 0.0);
    return eval_jet2(p_.lagrangian, t, zero, zero).grad_x;
  }

  Vec direct(double t) const {
    Vec g(n_, 0.0);
    const double len = p_.t1 - t;
    if (len <= 0.0) t = p_.t1;
    const auto& r = *rule_;
    const double scale = std::pow(0.5, p_.alpha + p_.beta - 1.0) / gamma(p_.alpha);
    for (int i = 0; i < r.n; ++i) {
      const double s = 0.5 * (1.0 + r.nodes[i]);
      const Vec cv = lx_at(t + len * s);
      for (std::size_t c = 0; c < n_; ++c) g[c] += r.weights[i] * cv[c];
    }
    for (double& v : g) v *= scale;
    return g;
  }

  bool interp_ok() const {
    for (int i = 1; i <= 7; ++i) {
      const double t = p_.t0 + (p_.t1 - p_.t0) * (i - 0.37) / 7.0;
      const Vec d = direct(t);
      for (std::size_t c = 0; c < n_; ++c)
        if (std::abs(interp_[c](t) - d[c]) > 1e-11 * (1.0 + std::abs(d[c]))) return false;
    }
    return true;
  }
};

inline Matrix half_inverse(const Matrix& a) {
  Matrix inv = inverse(a);
  for (std::size_t i = 0; i < inv.rows(); ++i)
    for (std::size_t j = 0; j < inv.cols(); ++j) inv(i, j) *= 0.5;
  return inv;
}

inline bool all_close(const Vec& a, const Vec& b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol * (1.0 + std::abs(b[i]))) return false;
  return true;
}

}  // namespace detail

/// Closed-form extremal for the separable class, per variant and regime.
inline SolveOutcome solve_separable(const ProblemSpec& p, int n_quad = kDefaultQuadN) {
  p.validate();
  SolveOutcome out;
  out.regime = p.regime();
  const std::size_t n = p.n;
  if (!is_separable_lagrangian(p.lagrangian)) {
    out.diagnosis = "NON_SEPARABLE_LAGRANGIAN";
    return out;
  }
  if (p.terminant && !is_quadratic_terminant(*p.terminant)) {
    out.diagnosis = "NON_QUADRATIC_TERMINANT";
    return out;
  }
  const Vec zero(n, 0.0);
  const double tm = 0.5 * (p.t0 + p.t1);
  Matrix A = eval_jet2(p.lagrangian, tm, zero, zero).H_yy.symmetrized();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) *= 0.5;
  const SymmetricEigen eig = symmetric_eigen(A);
  if (!(eig.values.front() > 1e-12 * std::max(1.0, std::abs(eig.values.back())))) {
    out.diagnosis = "QUADRATIC_FORM_NOT_POSITIVE_DEFINITE";
    return out;
  }
  const Matrix hA = detail::half_inverse(A);  // (2A)^-1

  const auto sc = std::make_shared<const detail::SOfC>(p, n_quad);
  const double ga = gamma(p.alpha);

  // integral data
  Vec isc1(n, 0.0), cw(n, 0.0);
  {
    KernelSpec k;
    k.c = p.t0;
    k.d = p.t1;
    k.right_point = p.t1;
    k.right_exp = 2.0 * p.alpha - 1.0;
    k.grade_points = {p.t0};
    k.n = n_quad;
    const CompositeRule r = composite_rule(k);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const Vec g = sc->G(r.nodes[i]);
      for (std::size_t c = 0; c < n; ++c) isc1[c] += r.weights[i] * g[c] / ga;
    }
    k.right_exp = p.beta - 1.0;
    k.grade_points = {p.t0, p.t1};
    const CompositeRule rw = composite_rule(k);
    for (std::size_t i = 0; i < rw.nodes.size(); ++i) {
      const Vec cv = sc->c(rw.nodes[i]);
      for (std::size_t c = 0; c < n; ++c) cw[c] += rw.weights[i] * cv[c];
    }
  }

  // quadratic terminant data: l_a = ga + Haa a + Hab b, l_b = gb + Hab^T a + Hbb b
  const TerminantPartials t0p = terminant_at(p, zero, zero);
  const Vec& g_a = t0p.la;
  const Vec& g_b = t0p.lb;
  const Matrix& Haa = t0p.laa;
  const Matrix& Hab = t0p.lab;
  const Matrix& Hbb = t0p.lbb;
  const Matrix HabT = Hab.transposed();

  const Vec hA_isc1 = hA * isc1;
  Vec kappa(n, 0.0);
  Vec x0(n, 0.0), x1(n, 0.0);

  auto build = [&](const Vec& kap) {
    const double t1 = p.t1, alpha = p.alpha, beta = p.beta;
    const Matrix hAc = hA;
    const Vec kp = kap;
    return CalphaFunction(p.t0, p.t1, p.alpha, x0, [=](double t) {
      const double phi = std::pow(t1 - t, alpha - beta) / ga;
      const Vec s = sc->Sc(t);
      Vec rhs(kp.size());
      for (std::size_t c = 0; c < kp.size(); ++c) rhs[c] = (kp[c] == 0.0 ? 0.0 : kp[c] * phi) - s[c];
      return hAc * rhs;
    });
  };

  if (out.regime == Regime::CaseTwo) {
    const double phi1 = std::pow(p.t1 - p.t0, 2.0 * p.alpha - p.beta) / (ga * ga * (2.0 * p.alpha - p.beta));
    switch (p.variant) {
      case Variant::Simplest: {
        x0 = *p.x0_fixed;
        x1 = *p.x1_fixed;
        Vec r(n);
        for (std::size_t c = 0; c < n; ++c) r[c] = x1[c] - x0[c];
        const Vec twoA_r = A * r;
        for (std::size_t c = 0; c < n; ++c) kappa[c] = (2.0 * twoA_r[c] + isc1[c]) / phi1;
        out.k = kappa;
        break;
      }
      case Variant::FreeInitial: {
        // unknowns (x0, k), kappa = -k
        x1 = *p.x1_fixed;
        Matrix M(2 * n, 2 * n);
        Vec rhs(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            M(i, j) = Haa(i, j);
            M(n + i, n + j) = -hA(i, j) * phi1;
          }
          M(i, n + i) = 1.0;
          M(n + i, i) = 1.0;
          rhs[i] = -cw[i] - g_a[i];
          rhs[n + i] = x1[i] + hA_isc1[i];
        }
        const Vec sol = solve(M, rhs);
        Vec k(n);
        for (std::size_t i = 0; i < n; ++i) {
          x0[i] = sol[i];
          k[i] = sol[n + i];
          kappa[i] = -k[i];
        }
        out.k = k;
        break;
      }
      case Variant::Bolza: {
        // unknowns (x0, x1), kappa = -l_b(x0, x1)
        Matrix M(2 * n, 2 * n);
        Vec rhs(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
          // x1 - x0 + phi1 hA (gb + Hab^T x0 + Hbb x1) = -hA isc1
          for (std::size_t j = 0; j < n; ++j) {
            double sa = 0.0, sb = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
              sa += hA(i, l) * HabT(l, j);
              sb += hA(i, l) * Hbb(l, j);
            }
            M(i, j) = phi1 * sa;
            M(i, n + j) = phi1 * sb;
            // cw + la + lb = 0
            M(n + i, j) = Haa(i, j) + HabT(i, j);
            M(n + i, n + j) = Hab(i, j) + Hbb(i, j);
          }
          M(i, i) -= 1.0;
          M(i, n + i) += 1.0;
          const Vec hAgb = hA * g_b;
          rhs[i] = -hA_isc1[i] - phi1 * hAgb[i];
          rhs[n + i] = -cw[i] - g_a[i] - g_b[i];
        }
        const Vec sol = solve(M, rhs);
        for (std::size_t i = 0; i < n; ++i) {
          x0[i] = sol[i];
          x1[i] = sol[n + i];
        }
        const Vec lb = [&] {
          Vec v = g_b;
          const Vec a1 = HabT * x0, b1 = Hbb * x1;
          for (std::size_t i = 0; i < n; ++i) v[i] += a1[i] + b1[i];
          return v;
        }();
        for (std::size_t i = 0; i < n; ++i) kappa[i] = -lb[i];
        out.k = kappa;
        break;
      }
      case Variant::FreeFinal: {
        x0 = *p.x0_fixed;
        // (I + phi1 hA Hbb) x1 = x0 - hA isc1 - phi1 hA gb
        Matrix M = hA * Hbb;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) M(i, j) *= phi1;
        for (std::size_t i = 0; i < n; ++i) M(i, i) += 1.0;
        const Vec hAgb = hA * g_b;
        Vec rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = x0[i] - hA_isc1[i] - phi1 * hAgb[i];
        x1 = solve(M, rhs);
        const Vec b1 = Hbb * x1;
        for (std::size_t i = 0; i < n; ++i) kappa[i] = -(g_b[i] + b1[i]);
        out.k = kappa;
        break;
      }
    }
  } else {
    // psi = -hA Sc, so x(t1) - x(t0) = D
    Vec D(n);
    for (std::size_t i = 0; i < n; ++i) D[i] = -hA_isc1[i];
    const double tol = kAdmissibilityTol;
    switch (p.variant) {
      case Variant::Simplest: {
        x0 = *p.x0_fixed;
        x1 = *p.x1_fixed;
        Vec reach(n);
        for (std::size_t i = 0; i < n; ++i) reach[i] = x0[i] + D[i];
        if (!detail::all_close(reach, x1, tol)) {
          out.status = SolveStatus::NoExtremal;
          out.diagnosis = sc->zero() ? "CASE1_FORCES_CONSTANT" : "CASE1_BOUNDARY_MISMATCH";
          out.x0 = x0;
          out.x1 = x1;
          return out;
        }
        break;
      }
      case Variant::FreeInitial: {
        x1 = *p.x1_fixed;
        for (std::size_t i = 0; i < n; ++i) x0[i] = x1[i] - D[i];
        const Vec la = [&] {
          Vec v = g_a;
          const Vec h = Haa * x0;
          for (std::size_t i = 0; i < n; ++i) v[i] += h[i] + cw[i];
          return v;
        }();
        if (!detail::all_close(la, zero, tol)) {
          out.status = SolveStatus::NoExtremal;
          out.diagnosis = "CASE1_TRANSVERSALITY_VIOLATED";
          out.x0 = x0;
          out.x1 = x1;
          return out;
        }
        break;
      }
      case Variant::Bolza: {
        // x1 - x0 = D; cw + la = 0; lb = 0 (overdetermined, solved in least squares)
        Matrix M(3 * n, 2 * n);
        Vec rhs(3 * n);
        for (std::size_t i = 0; i < n; ++i) {
          M(i, i) = -1.0;
          M(i, n + i) = 1.0;
          rhs[i] = D[i];
          for (std::size_t j = 0; j < n; ++j) {
            M(n + i, j) = Haa(i, j);
            M(n + i, n + j) = Hab(i, j);
            M(2 * n + i, j) = HabT(i, j);
            M(2 * n + i, n + j) = Hbb(i, j);
          }
          rhs[n + i] = -cw[i] - g_a[i];
          rhs[2 * n + i] = -g_b[i];
        }
        const LeastSquares ls = least_squares(M, rhs);
        for (std::size_t i = 0; i < n; ++i) {
          x0[i] = ls.x[i];
          x1[i] = ls.x[n + i];
        }
        const Vec ax = M * ls.x;
        double trans = 0.0, fin = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          trans = std::max(trans, std::abs(ax[n + i] - rhs[n + i]) / (1.0 + std::abs(rhs[n + i])));
          fin = std::max(fin, std::abs(ax[2 * n + i] - rhs[2 * n + i]) / (1.0 + std::abs(rhs[2 * n + i])));
          trans = std::max(trans, std::abs(ax[i] - rhs[i]) / (1.0 + std::abs(rhs[i])));
        }
        if (fin > tol || trans > tol) {
          out.status = SolveStatus::NoExtremal;
          out.diagnosis = fin > tol ? "CASE1_FREE_END_REQUIRES_LX1_ZERO" : "CASE1_TRANSVERSALITY_VIOLATED";
          out.x0 = x0;
          out.x1 = x1;
          return out;
        }
        if (ls.rank < 2 * n) throw SingularSystem("Bolza endpoint system is rank-deficient; extremal not unique");
        break;
      }
      case Variant::FreeFinal: {
        x0 = *p.x0_fixed;
        for (std::size_t i = 0; i < n; ++i) x1[i] = x0[i] + D[i];
        Vec lb = g_b;
        const Vec b1 = Hbb * x1;
        for (std::size_t i = 0; i < n; ++i) lb[i] += b1[i];
        if (!detail::all_close(lb, zero, tol)) {
          out.status = SolveStatus::NoExtremal;
          out.diagnosis = "CASE1_FREE_END_REQUIRES_LX1_ZERO";
          out.x0 = x0;
          out.x1 = x1;
          return out;
        }
        break;
      }
    }
  }

  if (out.regime == Regime::CaseOne) out.k = Vec(n, 0.0);
  out.x0 = x0;
  out.x1 = x1;
  out.trajectory = build(kappa);
  out.J = evaluate_functional(p, *out.trajectory, n_quad);
  const ElReport rep = el_residual(p, *out.trajectory, kDefaultNodes, n_quad);
  out.residual = rep.max_abs;
  if (rep.max_abs <= kExtremalResidualTol) {
    out.status = SolveStatus::Extremal;
  } else {
    out.status = SolveStatus::Unsupported;
    out.diagnosis = "RESIDUAL_CHECK_FAILED";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct minimization

namespace detail {

/// Continuous piecewise polynomial basis on a mesh graded geometrically toward t1.
class PanelBasis {
 public:
  PanelBasis(double t0, double t1, int m) {
    degree_ = 8;
    int panels = std::max(1, (m - 1 + degree_ - 1) / degree_);
    if (m <= degree_ + 1) {
      panels = 1;
      degree_ = std::max(1, m - 1);
    }
    cuts_.push_back(t0);
    for (int k = 1; k < panels; ++k) cuts_.push_back(t1 - (t1 - t0) * std::pow(0.25, k));
    cuts_.push_back(t1);
    size_ = static_cast<std::size_t>(panels * degree_ + 1);
    for (int pnl = 0; pnl < panels; ++pnl) {
      const Vec pts = chebyshev_lobatto(static_cast<std::size_t>(degree_ + 1), cuts_[pnl], cuts_[pnl + 1]);
      for (int l = (pnl == 0 ? 0 : 1); l <= degree_; ++l) nodes_.push_back(pts[static_cast<std::size_t>(l)]);
      templates_.emplace_back(cuts_[pnl], cuts_[pnl + 1], Vec(static_cast<std::size_t>(degree_ + 1), 0.0));
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t panels() const noexcept { return cuts_.size() - 1; }
  int degree() const noexcept { return degree_; }
  const std::vector<double>& cuts() const noexcept { return cuts_; }
  std::vector<double> interior_cuts() const { return {cuts_.begin() + 1, cuts_.end() - 1}; }

  std::size_t panel_of(double t) const {
    for (std::size_t k = 0; k + 1 < cuts_.size(); ++k)
      if (t <= cuts_[k + 1]) return k;
    return cuts_.size() - 2;
  }

  /// Nonzero basis values at t: first global index and degree+1 local values.
  std::pair<std::size_t, Vec> local(double t) const {
    const std::size_t k = panel_of(t);
    return {k * static_cast<std::size_t>(degree_), templates_[k].basis(t)};
  }

  /// One interpolant per panel from global coefficient values.
  std::vector<ChebInterp> interpolants(std::span<const double> u) const {
    std::vector<ChebInterp> out;
    for (std::size_t k = 0; k + 1 < cuts_.size(); ++k) {
      Vec v(u.begin() + static_cast<long>(k * degree_), u.begin() + static_cast<long>(k * degree_ + degree_ + 1));
      out.emplace_back(cuts_[k], cuts_[k + 1], std::move(v));
    }
    return out;
  }

 private:
  int degree_ = 8;
  std::size_t size_ = 0;
  std::vector<double> cuts_;
  Vec nodes_;
  std::vector<ChebInterp> templates_;
};

}  // namespace detail

struct MinimizeOptions {
  int n_quad = kDefaultQuadN;
};

/// Minimizes J over psi in a continuous piecewise-polynomial space with about
/// m coefficients per component, by BFGS with Armijo backtracking.
inline SolveOutcome direct_minimize(const ProblemSpec& p, int m, double tol, int max_iter,
                                    const MinimizeOptions& opt = {}) {
  p.validate();
  if (m < 2 || m > 512) throw LimitError("direct_minimize: m must lie in [2, 512]");
  const std::size_t n = p.n;
  const detail::PanelBasis basis(p.t0, p.t1, m);
  const std::size_t M = basis.size();
  const double ga = gamma(p.alpha);

  // outer nodes and the matrices x = x0 + A u, psi = B u
  KernelSpec ok;
  ok.c = p.t0;
  ok.d = p.t1;
  ok.right_point = p.t1;
  ok.right_exp = p.beta - 1.0;
  ok.grade_points = {p.t0, p.t1};
  ok.breaks = basis.interior_cuts();
  ok.n = opt.n_quad;
  const CompositeRule outer = composite_rule(ok);
  const std::size_t N = outer.nodes.size();
  Matrix Am(N, M), Bm(N, M);
  auto rl_row = [&](double tau, std::span<double> row) {
    if (tau <= p.t0) return;
    KernelSpec k;
    k.c = p.t0;
    k.d = tau;
    k.right_point = tau;
    k.right_exp = p.alpha - 1.0;
    k.breaks = basis.interior_cuts();
    k.n = std::max(opt.n_quad, basis.degree() + 2);
    const CompositeRule r = composite_rule(k);
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const auto [first, vals] = basis.local(r.nodes[q]);
      for (std::size_t l = 0; l < vals.size(); ++l) row[first + l] += r.weights[q] * vals[l] / ga;
    }
  };
  for (std::size_t i = 0; i < N; ++i) {
    const auto [first, vals] = basis.local(outer.nodes[i]);
    for (std::size_t l = 0; l < vals.size(); ++l) Bm(i, first + l) = vals[l];
    Vec row(M, 0.0);
    rl_row(outer.nodes[i], row);
    for (std::size_t j = 0; j < M; ++j) Am(i, j) = row[j];
  }
  Vec cend(M, 0.0);
  rl_row(p.t1, cend);

  // z = [u (component-major, n*M), x0 (n)] = z0 + E v
  const std::size_t nz = n * M + n;
  auto uidx = [&](std::size_t c, std::size_t j) { return c * M + j; };
  auto xidx = [&](std::size_t c) { return n * M + c; };
  Vec z0(nz, 0.0);
  std::vector<std::vector<std::pair<std::size_t, double>>> cols;  // sparse columns of E
  std::size_t jstar = 0;
  for (std::size_t j = 1; j < M; ++j)
    if (std::abs(cend[j]) > std::abs(cend[jstar])) jstar = j;
  switch (p.variant) {
    case Variant::Simplest:
      for (std::size_t c = 0; c < n; ++c) {
        z0[xidx(c)] = (*p.x0_fixed)[c];
        z0[uidx(c, jstar)] = ((*p.x1_fixed)[c] - (*p.x0_fixed)[c]) / cend[jstar];
        for (std::size_t j = 0; j < M; ++j) {
          if (j == jstar) continue;
          cols.push_back({{uidx(c, j), 1.0}, {uidx(c, jstar), -cend[j] / cend[jstar]}});
        }
      }
      break;
    case Variant::FreeInitial:
      for (std::size_t c = 0; c < n; ++c) {
        z0[xidx(c)] = (*p.x1_fixed)[c];
        for (std::size_t j = 0; j < M; ++j) cols.push_back({{uidx(c, j), 1.0}, {xidx(c), -cend[j]}});
      }
      break;
    case Variant::Bolza:
      for (std::size_t i = 0; i < nz; ++i) cols.push_back({{i, 1.0}});
      break;
    case Variant::FreeFinal:
      for (std::size_t c = 0; c < n; ++c) {
        z0[xidx(c)] = (*p.x0_fixed)[c];
        for (std::size_t j = 0; j < M; ++j) cols.push_back({{uidx(c, j), 1.0}});
      }
      break;
  }
  const std::size_t nv = cols.size();
  auto to_z = [&](const Vec& v) {
    Vec z = z0;
    for (std::size_t k = 0; k < nv; ++k)
      for (const auto& [row, val] : cols[k]) z[row] += val * v[k];
    return z;
  };

  // J and its z-gradient
  auto objective = [&](const Vec& z, Vec* grad) {
    double J = 0.0;
    if (grad) grad->assign(nz, 0.0);
    Vec xv(n), yv(n);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        double xs = z[xidx(c)], ys = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          const double u = z[uidx(c, j)];
          xs += Am(i, j) * u;
          ys += Bm(i, j) * u;
        }
        xv[c] = xs;
        yv[c] = ys;
      }
      const double w = outer.weights[i];
      if (!grad) {
        J += w * eval(p.lagrangian, outer.nodes[i], xv, yv);
        continue;
      }
      const Jet2Result jr = eval_jet2(p.lagrangian, outer.nodes[i], xv, yv);
      J += w * jr.value;
      for (std::size_t c = 0; c < n; ++c) {
        const double gx = w * jr.grad_x[c], gy = w * jr.grad_y[c];
        (*grad)[xidx(c)] += gx;
        for (std::size_t j = 0; j < M; ++j) (*grad)[uidx(c, j)] += gx * Am(i, j) + gy * Bm(i, j);
      }
    }
    if (p.terminant) {
      Vec a(n), b(n);
      for (std::size_t c = 0; c < n; ++c) {
        a[c] = z[xidx(c)];
        double s = a[c];
        for (std::size_t j = 0; j < M; ++j) s += cend[j] * z[uidx(c, j)];
        b[c] = s;
      }
      if (!grad) {
        J += eval(*p.terminant, 0.0, {}, {}, a, b);
      } else {
        const Jet2Result tj = eval_terminant_jet(*p.terminant, a, b);
        J += tj.value;
        for (std::size_t c = 0; c < n; ++c) {
          (*grad)[xidx(c)] += tj.grad_x[c] + tj.grad_y[c];
          for (std::size_t j = 0; j < M; ++j) (*grad)[uidx(c, j)] += tj.grad_y[c] * cend[j];
        }
      }
    }
    return J;
  };
  auto fg = [&](const Vec& v, Vec& g) {
    Vec gz;
    const double J = objective(to_z(v), &gz);
    g.assign(nv, 0.0);
    for (std::size_t k = 0; k < nv; ++k)
      for (const auto& [row, val] : cols[k]) g[k] += val * gz[row];
    return J;
  };

  // diagonal scaling from the psi mass matrix
  Vec diag(nv, 0.0);
  {
    Vec dz(nz, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < M; ++j) {
        const double b = Bm(i, j);
        if (b == 0.0) continue;
        for (std::size_t c = 0; c < n; ++c) dz[uidx(c, j)] += outer.weights[i] * b * b;
      }
    double total = 0.0;
    for (double w : outer.weights) total += w;
    for (std::size_t c = 0; c < n; ++c) dz[xidx(c)] = total;
    for (std::size_t k = 0; k < nv; ++k) {
      for (const auto& [row, val] : cols[k]) diag[k] += val * val * dz[row];
      diag[k] = std::max(diag[k], 1e-300);
    }
  }

  // exact Hessian at the start point seeds the inverse-Hessian estimate
  auto seed_inverse = [&]() -> std::optional<Matrix> {
    const Vec z = to_z(Vec(nv, 0.0));
    Matrix Hz(nz, nz);
    Matrix G(2 * n, nz);
    auto accumulate = [&](const Matrix& hess, double w) {
      const Matrix P = hess * G;
      for (std::size_t r = 0; r < 2 * n; ++r)
        for (std::size_t a = 0; a < nz; ++a) {
          const double ga_ = w * G(r, a);
          if (ga_ == 0.0) continue;
          for (std::size_t b = 0; b < nz; ++b) Hz(a, b) += ga_ * P(r, b);
        }
    };
    auto block = [&](const Jet2Result& jr) {
      Matrix h(2 * n, 2 * n);
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          h(c, d) = jr.H_xx(c, d);
          h(c, n + d) = jr.H_xy(c, d);
          h(n + d, c) = jr.H_xy(c, d);
          h(n + c, n + d) = jr.H_yy(c, d);
        }
      return h;
    };
    Vec xv(n), yv(n);
    for (std::size_t i = 0; i < N; ++i) {
      G = Matrix(2 * n, nz);
      for (std::size_t c = 0; c < n; ++c) {
        G(c, xidx(c)) = 1.0;
        double xs = z[xidx(c)], ys = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          G(c, uidx(c, j)) = Am(i, j);
          G(n + c, uidx(c, j)) = Bm(i, j);
          xs += Am(i, j) * z[uidx(c, j)];
          ys += Bm(i, j) * z[uidx(c, j)];
        }
        xv[c] = xs;
        yv[c] = ys;
      }
      accumulate(block(eval_jet2(p.lagrangian, outer.nodes[i], xv, yv)), outer.weights[i]);
    }
    if (p.terminant) {
      G = Matrix(2 * n, nz);
      Vec a(n), b(n);
      for (std::size_t c = 0; c < n; ++c) {
        G(c, xidx(c)) = 1.0;
        G(n + c, xidx(c)) = 1.0;
        a[c] = b[c] = z[xidx(c)];
        for (std::size_t j = 0; j < M; ++j) {
          G(n + c, uidx(c, j)) = cend[j];
          b[c] += cend[j] * z[uidx(c, j)];
        }
      }
      accumulate(block(eval_terminant_jet(*p.terminant, a, b)), 1.0);
    }
    Matrix Hv(nv, nv);
    for (std::size_t k = 0; k < nv; ++k)
      for (std::size_t l = 0; l < nv; ++l) {
        double s = 0.0;
        for (const auto& [ra, va] : cols[k])
          for (const auto& [rb, vb] : cols[l]) s += va * vb * Hz(ra, rb);
        Hv(k, l) = s;
      }
    // scale before testing definiteness
    Matrix S(nv, nv);
    for (std::size_t k = 0; k < nv; ++k)
      for (std::size_t l = 0; l < nv; ++l) S(k, l) = Hv(k, l) / std::sqrt(diag[k] * diag[l]);
    const SymmetricEigen e = symmetric_eigen(S.symmetrized());
    if (!(e.values.front() > 1e-12 * std::abs(e.values.back()))) return std::nullopt;
    try {
      return inverse(Hv.symmetrized());
    } catch (const SingularSystem&) {
      return std::nullopt;
    }
  };

  Vec v(nv, 0.0), g;
  double f = fg(v, g);
  Matrix H(nv, nv);
  for (std::size_t k = 0; k < nv; ++k) H(k, k) = 1.0 / diag[k];
  if (nv <= 600)
    if (auto seeded = seed_inverse()) H = std::move(*seeded);
  SolveOutcome out;
  out.regime = p.regime();
  int iter = 0;
  bool converged = norm_inf(g) <= tol;
  Vec gn;
  while (!converged && iter < max_iter) {
    ++iter;
    Vec d = H * g;
    for (double& x : d) x = -x;
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      H = Matrix(nv, nv);
      for (std::size_t k = 0; k < nv; ++k) H(k, k) = 1.0 / diag[k];
      d = H * g;
      for (double& x : d) x = -x;
      slope = dot(g, d);
    }
    double step = 1.0;
    Vec vn(nv);
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t k = 0; k < nv; ++k) vn[k] = v[k] + step * d[k];
      fn = fg(vn, gn);
      if (fn <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Vec s(nv), y(nv);
    for (std::size_t k = 0; k < nv; ++k) {
      s[k] = vn[k] - v[k];
      y[k] = gn[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-14 * norm2(s) * norm2(y)) {
      const Vec Hy = H * y;
      const double yHy = dot(y, Hy);
      const double rho = 1.0 / sy;
      for (std::size_t a = 0; a < nv; ++a)
        for (std::size_t b = 0; b < nv; ++b)
          H(a, b) += (1.0 + yHy * rho) * rho * s[a] * s[b] - rho * (Hy[a] * s[b] + s[a] * Hy[b]);
    }
    v = std::move(vn);
    g = gn;
    f = fn;
    converged = norm_inf(g) <= tol;
  }

  const Vec z = to_z(v);
  Vec x0(n);
  for (std::size_t c = 0; c < n; ++c) x0[c] = z[xidx(c)];
  std::vector<std::vector<ChebInterp>> per_comp;
  for (std::size_t c = 0; c < n; ++c)
    per_comp.push_back(basis.interpolants(std::span<const double>(z.data() + uidx(c, 0), M)));
  std::vector<PsiPanel> panels;
  for (std::size_t k = 0; k < basis.panels(); ++k) {
    std::vector<ChebInterp> pieces;
    for (std::size_t c = 0; c < n; ++c) pieces.push_back(per_comp[c][k]);
    panels.push_back({basis.cuts()[k], basis.cuts()[k + 1], [pieces](double t) {
                        Vec r(pieces.size());
                        for (std::size_t c = 0; c < pieces.size(); ++c) r[c] = pieces[c](t);
                        return r;
                      }});
  }
  out.trajectory = CalphaFunction(p.t0, p.t1, p.alpha, x0, std::move(panels), {});
  out.x0 = x0;
  out.x1 = evaluate(*out.trajectory, p.t1, opt.n_quad);
  out.iterations = iter;
  out.grad_norm = norm_inf(g);
  out.k = Vec(n, 0.0);
  out.J = evaluate_functional(p, *out.trajectory, opt.n_quad);
  if (converged) {
    out.status = SolveStatus::Extremal;
  } else {
    out.status = SolveStatus::Unsupported;
    out.diagnosis = "NONCONVERGED";
  }
  return out;
}

}  // namespace fvc
