#pragma once

// Gauss-Jacobi rules and a graded composite integrator for weakly singular
// kernels (R - tau)^a (tau - L)^b.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "fvc/errors.hpp"
#include "fvc/linalg.hpp"
#include "fvc/special.hpp"

namespace fvc {

inline constexpr int kDefaultQuadN = 64;

struct QuadRule {
  int n = 0;
  double a_exp = 0.0;  // exponent of (1 - s)
  double b_exp = 0.0;  // exponent of (1 + s)
  Vec nodes;
  Vec weights;
};

namespace detail {

// Implicit QL on a symmetric tridiagonal matrix. Only the first component of
// each eigenvector is tracked, which is all Golub-Welsch needs.
inline void tridiagonal_ql(Vec& d, Vec& e, Vec& z) {
  const int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  if (n > 0) e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) + dd == dd) break;
      }
      if (m != l) {
        if (++iter > 100) throw LimitError("jacobi_rule: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline QuadRule build_jacobi_rule(int n, double a, double b) {
  Vec diag(n), off(n, 0.0), z(n, 0.0);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      diag[k] = (b - a) / (ab + 2.0);
    } else {
      const double s = 2.0 * k + ab;
      diag[k] = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    double v;
    if (k == 1) {
      v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      const double s = 2.0 * k + ab;
      v = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    off[k] = std::sqrt(v);
  }
  z[0] = 1.0;
  tridiagonal_ql(diag, off, z);
  const double mu0 = std::exp((a + b + 1.0) * std::log(2.0)) * beta(a + 1.0, b + 1.0);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });
  QuadRule rule{n, a, b, Vec(n), Vec(n)};
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = diag[order[i]];
    rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
  }
  return rule;
}

inline long long quantize_exponent(double e) { return std::llround(e * 1e14); }

class RuleCache {
 public:
  std::shared_ptr<const QuadRule> get(int n, double a, double b) {
    const auto key = std::make_tuple(n, quantize_exponent(a), quantize_exponent(b));
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = rules_.find(key);
      if (it != rules_.end()) return it->second;
    }
    auto rule = std::make_shared<const QuadRule>(build_jacobi_rule(n, a, b));
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = rules_.emplace(key, rule);
    return it->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, long long, long long>, std::shared_ptr<const QuadRule>> rules_;
};

inline RuleCache& rule_cache() {
  static RuleCache cache;
  return cache;
}

inline bool same_exponent(double x, double y) { return quantize_exponent(x) == quantize_exponent(y); }

}  // namespace detail

/// Cached Gauss-Jacobi rule for the weight (1-s)^a (1+s)^b on (-1,1).
inline std::shared_ptr<const QuadRule> jacobi_rule_shared(int n, double a_exp, double b_exp) {
  if (!(a_exp > -1.0) || !(b_exp > -1.0) || !std::isfinite(a_exp) || !std::isfinite(b_exp))
    throw DomainError("jacobi_rule: exponents must exceed -1");
  if (n < 1 || n > 512) throw LimitError("jacobi_rule: n must lie in [1, 512]");
  return detail::rule_cache().get(n, a_exp, b_exp);
}

inline QuadRule jacobi_rule(int n, double a_exp, double b_exp) { return *jacobi_rule_shared(n, a_exp, b_exp); }

/// int_c^d (d - tau)^right_exp (tau - c)^left_exp f(tau) dtau with one rule.
template <class F>
double integrate_weighted(F&& f, double c, double d, double right_exp, double left_exp, const QuadRule& rule) {
  if (!(c < d)) throw DomainError("integrate_weighted: need c < d");
  if (!detail::same_exponent(rule.a_exp, right_exp) || !detail::same_exponent(rule.b_exp, left_exp))
    throw DomainError("integrate_weighted: rule exponents do not match");
  const double half = 0.5 * (d - c);
  const double scale = std::pow(half, 1.0 + right_exp + left_exp);
  double sum = 0.0;
  for (int i = 0; i < rule.n; ++i) sum += rule.weights[i] * f(c + half * (1.0 + rule.nodes[i]));
  return scale * sum;
}

/// Integration problem for the composite engine: the integral over [c,d] of
/// (right_point - tau)^right_exp (tau - left_point)^left_exp g(tau), where g is
/// smooth except at `grade_points` (algebraic endpoint behaviour) and `breaks`
/// (jumps). Kernel points must lie outside (c,d) or on its ends.
struct KernelSpec {
  double c = 0.0;
  double d = 1.0;
  double right_point = 1.0;
  double right_exp = 0.0;
  double left_point = 0.0;
  double left_exp = 0.0;
  std::vector<double> grade_points;
  std::vector<double> breaks;
  int n = kDefaultQuadN;
};

struct CompositeRule {
  Vec nodes;
  Vec weights;  // kernel factors included

  template <class F>
  double integrate(F&& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * g(nodes[i]);
    return s;
  }
};

namespace detail {

struct CompositeBuilder {
  const KernelSpec& spec;
  double h_min;
  double snap;
  int n_sub;
  std::vector<double> grades;
  CompositeRule out;

  bool kernel_at(double p, double exp, double x) const { return exp != 0.0 && std::abs(p - x) <= snap; }

  static double gap(double p, double u, double v) {
    if (p <= u) return u - p;
    if (p >= v) return p - v;
    return 0.0;
  }

  void emit(double u, double v, bool whole) {
    const bool right_abs = kernel_at(spec.right_point, spec.right_exp, v);
    const bool left_abs = kernel_at(spec.left_point, spec.left_exp, u);
    const double ra = right_abs ? spec.right_exp : 0.0;
    const double la = left_abs ? spec.left_exp : 0.0;
    const int count = (whole || right_abs || left_abs) ? spec.n : n_sub;
    const auto rule = jacobi_rule_shared(count, ra, la);
    const double half = 0.5 * (v - u);
    const double scale = std::pow(half, 1.0 + ra + la);
    for (int i = 0; i < count; ++i) {
      const double s = rule->nodes[i];
      const double tau = u + half * (1.0 + s);
      double w = scale * rule->weights[i];
      // kernel distances from the panel edge, so panels next to a kernel point keep full relative precision
      if (spec.right_exp != 0.0 && !right_abs)
        w *= std::pow((spec.right_point - v) + half * (1.0 - s), spec.right_exp);
      if (spec.left_exp != 0.0 && !left_abs)
        w *= std::pow((u - spec.left_point) + half * (1.0 + s), spec.left_exp);
      out.nodes.push_back(tau);
      out.weights.push_back(w);
    }
  }

  bool acceptable(double u, double v) const {
    const double len = v - u;
    auto check = [&](double p, bool absorbable) {
      const double g = gap(p, u, v);
      if (g > snap) return g >= len;
      if (std::abs(p - u) > snap && std::abs(p - v) > snap) return false;  // interior
      return absorbable || len <= h_min;
    };
    if (spec.right_exp != 0.0 && !check(spec.right_point, true)) return false;
    if (spec.left_exp != 0.0 && !check(spec.left_point, true)) return false;
    for (double p : grades)
      if (!check(p, false)) return false;
    return true;
  }

  void refine(double u, double v, bool whole, int depth) {
    if (depth > 200 || acceptable(u, v)) {
      emit(u, v, whole);
      return;
    }
    const double mid = 0.5 * (u + v);
    refine(u, mid, false, depth + 1);
    refine(mid, v, false, depth + 1);
  }
};

}  // namespace detail

/// Nodes and weights that integrate g against the kernel of `spec`.
inline CompositeRule composite_rule(const KernelSpec& spec) {
  if (!(spec.c <= spec.d)) throw DomainError("composite_rule: need c <= d");
  const double scale = std::max({1.0, std::abs(spec.c), std::abs(spec.d)});
  const double snap = 1e-14 * scale;
  detail::CompositeBuilder b{spec, std::max(1e-13 * (spec.d - spec.c), 8.0 * snap), snap, std::min(spec.n, 16), {}, {}};
  if (spec.d - spec.c <= snap) return {};
  if (spec.right_exp != 0.0 && spec.right_point < spec.d - snap)
    throw DomainError("composite_rule: right kernel point inside the interval");
  if (spec.left_exp != 0.0 && spec.left_point > spec.c + snap)
    throw DomainError("composite_rule: left kernel point inside the interval");

  std::vector<double> cuts{spec.c, spec.d};
  auto interior = [&](double p) { return p > spec.c + snap && p < spec.d - snap; };
  for (double p : spec.breaks)
    if (interior(p)) cuts.push_back(p);
  for (double p : spec.grade_points) {
    if (interior(p)) cuts.push_back(p);
    b.grades.push_back(p);
  }
  auto dedupe = [&](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [&](double x, double y) { return y - x <= snap; }), v.end());
  };
  dedupe(cuts);
  dedupe(b.grades);
  cuts.front() = spec.c;
  cuts.back() = spec.d;
  const bool single = cuts.size() == 2;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) b.refine(cuts[i], cuts[i + 1], single, 0);
  return std::move(b.out);
}

}  // namespace fvc
