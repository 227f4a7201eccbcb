#pragma once

// Second-order necessary conditions: coefficients P, Q, R along a trajectory,
// a pointwise semidefiniteness check of P, and bump variations.

#include <cmath>
#include <functional>
#include <optional>
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

struct PQR {
  Matrix P;  // L_yy
  Matrix Q;  // L_xy
  Matrix R;  // L_xx
};

inline PQR pqr_along(const ProblemSpec& p, const CalphaFunction& x, double t, int n_quad = kDefaultQuadN) {
  if (t < p.t0 || t > p.t1) throw DomainError("pqr_along: t outside [t0,t1]");
  if (x.is_jump(t)) throw JumpPointError("pqr_along: t is a jump point of the Caputo derivative");
  const Jet2Result j = eval_jet2(p.lagrangian, t, evaluate(x, t, n_quad), x.psi(t));
  return {j.H_yy.symmetrized(), j.H_xy, j.H_xx.symmetrized()};
}

struct LegendreFailure {
  double t = 0.0;
  double eigenvalue = 0.0;
  Vec witness;
};

struct LegendreReport {
  Vec node_ts;
  Vec min_eigenvalues;
  std::optional<LegendreFailure> failure;  // empty means Pass
  double tolerance = 0.0;

  bool pass() const noexcept { return !failure.has_value(); }
};

inline constexpr double kPsdTol = 1e-9;

/// Pass iff the smallest eigenvalue of P is >= -tol (1 + |P|) at every node.
inline LegendreReport legendre_check(const ProblemSpec& p, const CalphaFunction& x, int n_nodes = kDefaultNodes,
                                     double tol = kPsdTol, int n_quad = kDefaultQuadN) {
  if (n_nodes < 1) throw LimitError("legendre_check: need at least one node");
  check_admissible(p, x, n_quad);
  LegendreReport rep;
  rep.tolerance = tol;
  const double guard = 1e-6 * (p.t1 - p.t0);
  double worst = 0.0;
  for (double t : chebyshev_interior(static_cast<std::size_t>(n_nodes), p.t0, p.t1)) {
    bool near_jump = false;
    for (double j : x.jumps()) near_jump = near_jump || std::abs(t - j) <= guard;
    if (near_jump) continue;
    const PQR c = pqr_along(p, x, t, n_quad);
    const SymmetricEigen e = symmetric_eigen(c.P);
    const double lo = e.values.front();
    rep.node_ts.push_back(t);
    rep.min_eigenvalues.push_back(lo);
    const double thr = -tol * (1.0 + c.P.max_abs());
    if (lo < thr && (!rep.failure || lo - thr < worst)) {
      worst = lo - thr;
      Vec r(p.n);
      for (std::size_t i = 0; i < p.n; ++i) r[i] = e.vectors(i, 0);
      rep.failure = LegendreFailure{t, lo, std::move(r)};
    }
  }
  return rep;
}

enum class BumpKind { MeanValueBump, ConstantBump };

struct BumpOrders {
  double alpha = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Variation supported on [sigma-eps, sigma+eps] that vanishes at t1.
/// MeanValueBump also vanishes at t0; ConstantBump starts from the value
/// that makes h(t1) = 0.
inline CalphaFunction bump_variation(BumpKind kind, double sigma, double eps, const Vec& r,
                                     const std::function<double(double)>& f, const BumpOrders& o,
                                     int n_quad = kDefaultQuadN) {
  const double lo = sigma - eps, hi = sigma + eps;
  if (!(eps > 0.0) || !(lo > o.t0) || !(hi < o.t1)) throw DomainError("bump_variation: support must lie inside (t0,t1)");
  if (r.empty()) throw DimensionError("bump_variation: empty direction");
  const double alpha = o.alpha;
  const double span = std::pow(o.t1 - lo, alpha) - std::pow(o.t1 - hi, alpha);
  auto zero = [n = r.size()](double) { return Vec(n, 0.0); };
  Vec x0(r.size(), 0.0);
  VecFn middle;
  if (kind == BumpKind::MeanValueBump) {
    if (!f) throw DegenerateBump("bump_variation: mean-value bump needs a shape function");
    KernelSpec k;
    k.c = lo;
    k.d = hi;
    k.right_point = o.t1;
    k.right_exp = alpha - 1.0;
    k.n = n_quad;
    const double kc = alpha * composite_rule(k).integrate(f) / span;
    double dev = 0.0;
    for (double t : chebyshev_lobatto(17, lo, hi)) dev = std::max(dev, std::abs(f(t) - kc));
    if (dev <= 1e-12 * (1.0 + std::abs(kc))) throw DegenerateBump("bump_variation: shape function is constant on the support");
    middle = [f, kc, r](double t) {
      Vec v = r;
      const double s = f(t) - kc;
      for (double& c : v) c *= s;
      return v;
    };
  } else {
    const double h0 = -span / gamma(alpha + 1.0);
    for (std::size_t i = 0; i < r.size(); ++i) x0[i] = h0 * r[i];
    middle = [r](double) { return r; };
  }
  std::vector<PsiPanel> panels{{o.t0, lo, zero}, {lo, hi, middle}, {hi, o.t1, zero}};
  return CalphaFunction(o.t0, o.t1, alpha, std::move(x0), std::move(panels), {lo, hi});
}

inline BumpKind probe_kind(Variant v) {
  return v == Variant::Simplest || v == Variant::FreeFinal ? BumpKind::MeanValueBump : BumpKind::ConstantBump;
}

/// Default eps list {0.2, 0.1, 0.05, 0.025} (t1-t0)/2, keeping supports 2 eps clear of t1.
inline Vec default_eps_list(double t0, double t1, double sigma) {
  Vec out;
  for (double f : {0.2, 0.1, 0.05, 0.025}) {
    const double e = f * 0.5 * (t1 - t0);
    if (sigma - e > t0 && sigma + 3.0 * e <= t1) out.push_back(e);
  }
  return out;
}

struct ProbePoint {
  double eps = 0.0;
  double delta2 = 0.0;
};

/// Second variation along bumps of shrinking width. The mean-value bump uses
/// the shape (t - sigma)/eps so its Caputo derivative stays of order |r|.
inline std::vector<ProbePoint> second_variation_probe(const ProblemSpec& p, const CalphaFunction& x, double sigma,
                                                      const Vec& eps_list, const Vec& r,
                                                      int n_quad = kDefaultQuadN) {
  if (r.size() != p.n) throw DimensionError("second_variation_probe: direction has the wrong dimension");
  std::vector<ProbePoint> out;
  const BumpKind kind = probe_kind(p.variant);
  for (double eps : eps_list) {
    if (sigma + 3.0 * eps > p.t1) throw DomainError("second_variation_probe: support must stay 2 eps clear of t1");
    const auto shape = [sigma, eps](double t) { return (t - sigma) / eps; };
    const CalphaFunction h = bump_variation(kind, sigma, eps, r, shape, {p.alpha, p.t0, p.t1}, n_quad);
    out.push_back({eps, second_variation(p, x, h, n_quad)});
  }
  return out;
}

}  // namespace fvc
