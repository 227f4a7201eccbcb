#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fvc/quadrature.hpp"
#include "fvc/special.hpp"
#include "oracle.hpp"

namespace {

double weight_mass(double a, double b) { return std::pow(2.0, a + b + 1.0) * fvc::beta(a + 1.0, b + 1.0); }

}  // namespace

TEST(JacobiRule, LowOrderLegendre) {
  const fvc::QuadRule r1 = fvc::jacobi_rule(1, 0.0, 0.0);
  ASSERT_EQ(r1.nodes.size(), 1u);
  EXPECT_NEAR(r1.nodes[0], 0.0, 1e-15);
  EXPECT_NEAR(r1.weights[0], 2.0, 1e-15);
  const fvc::QuadRule r2 = fvc::jacobi_rule(2, 0.0, 0.0);
  EXPECT_NEAR(r2.nodes[0], -0.5773502691896258, 1e-15);
  EXPECT_NEAR(r2.nodes[1], 0.5773502691896258, 1e-15);
  EXPECT_NEAR(r2.weights[0], 1.0, 1e-14);
  EXPECT_NEAR(r2.weights[1], 1.0, 1e-14);
}

TEST(JacobiRule, WeightMassAndOrdering) {
  const fvc::QuadRule r = fvc::jacobi_rule(8, -0.5, 0.0);
  double s = 0.0;
  for (double w : r.weights) s += w;
  EXPECT_NEAR(s, 2.0 * std::sqrt(2.0), 1e-12);
  for (double a : {-0.9, -0.5, 0.0, 0.3, 1.0})
    for (double b : {-0.7, 0.0, 0.5}) {
      for (int n : {1, 5, 64, 200}) {
        const fvc::QuadRule q = fvc::jacobi_rule(n, a, b);
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
          EXPECT_GT(q.weights[i], 0.0);
          EXPECT_GT(q.nodes[i], -1.0);
          EXPECT_LT(q.nodes[i], 1.0);
          if (i) {
            EXPECT_GT(q.nodes[i], q.nodes[i - 1]);
          }
          m += q.weights[i];
        }
        EXPECT_NEAR(m, weight_mass(a, b), 1e-12 * weight_mass(a, b)) << n << " " << a << " " << b;
      }
    }
}

TEST(JacobiRule, PolynomialExactness) {
  // moments int_{-1}^{1} (1-s)^a (1+s)^b s^k ds via the oracle
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (auto [a, b] : std::vector<std::pair<double, double>>{{-0.5, -0.5}, {-0.3, 0.4}, {0.0, 0.0}, {0.7, -0.2}}) {
    const int n = 6;
    std::vector<double> coef(2 * n);
    for (double& v : coef) v = c(rng);
    auto poly = [&](double s) {
      double r = 0.0;
      for (std::size_t k = coef.size(); k-- > 0;) r = r * s + coef[k];
      return r;
    };
    const fvc::QuadRule q = fvc::jacobi_rule(n, a, b);
    double got = 0.0;
    for (int i = 0; i < n; ++i) got += q.weights[i] * poly(q.nodes[i]);
    const double ref = oracle::tanh_sinh(
        [&](double s, double da, double db) { return std::pow(db, a) * std::pow(da, b) * poly(s); }, -1.0, 1.0);
    EXPECT_NEAR(got, ref, 1e-11 * std::max(1.0, std::abs(ref))) << a << " " << b;
  }
}

TEST(JacobiRule, Errors) {
  EXPECT_THROW(fvc::jacobi_rule(4, -1.0, 0.0), fvc::DomainError);
  EXPECT_THROW(fvc::jacobi_rule(4, 0.0, -1.5), fvc::DomainError);
  EXPECT_THROW(fvc::jacobi_rule(0, 0.0, 0.0), fvc::LimitError);
  EXPECT_THROW(fvc::jacobi_rule(513, 0.0, 0.0), fvc::LimitError);
}

TEST(JacobiRule, CachedRulesAreShared) {
  auto a = fvc::jacobi_rule_shared(37, -0.25, 0.125);
  auto b = fvc::jacobi_rule_shared(37, -0.25, 0.125);
  EXPECT_EQ(a.get(), b.get());
}

TEST(IntegrateWeighted, Examples) {
  const fvc::QuadRule r = fvc::jacobi_rule(16, -0.5, -0.5);
  EXPECT_NEAR(fvc::integrate_weighted([](double) { return 1.0; }, 0.0, 1.0, -0.5, -0.5, r), M_PI, 1e-13);
  const double alpha = 0.3, t = 0.8;
  const fvc::QuadRule p = fvc::jacobi_rule(8, alpha - 1.0, 0.0);
  EXPECT_NEAR(fvc::integrate_weighted([](double) { return 1.0; }, 0.0, t, alpha - 1.0, 0.0, p), std::pow(t, alpha) / alpha,
              1e-13);
  const fvc::QuadRule g = fvc::jacobi_rule(1, 0.0, 0.0);
  EXPECT_NEAR(fvc::integrate_weighted([](double x) { return x; }, 0.0, 1.0, 0.0, 0.0, g), 0.5, 1e-15);
}

TEST(IntegrateWeighted, Errors) {
  const fvc::QuadRule r = fvc::jacobi_rule(4, 0.0, 0.0);
  auto one = [](double) { return 1.0; };
  EXPECT_THROW(fvc::integrate_weighted(one, 1.0, 1.0, 0.0, 0.0, r), fvc::DomainError);
  EXPECT_THROW(fvc::integrate_weighted(one, 0.0, 1.0, -0.5, 0.0, r), fvc::DomainError);
}

TEST(IntegrateWeighted, RefinementAndSplitting) {
  auto f = [](double x) { return std::exp(x); };
  for (int n : {32, 64, 128}) {
    const double a = fvc::integrate_weighted(f, 0.0, 2.0, -0.4, 0.2, fvc::jacobi_rule(n, -0.4, 0.2));
    const double b = fvc::integrate_weighted(f, 0.0, 2.0, -0.4, 0.2, fvc::jacobi_rule(2 * n, -0.4, 0.2));
    EXPECT_LE(std::abs(a - b), 1e-10);
  }
  const fvc::QuadRule r = fvc::jacobi_rule(32, 0.0, 0.0);
  const double whole = fvc::integrate_weighted(f, 0.0, 2.0, 0.0, 0.0, r);
  const double split = fvc::integrate_weighted(f, 0.0, 0.7, 0.0, 0.0, r) + fvc::integrate_weighted(f, 0.7, 2.0, 0.0, 0.0, r);
  EXPECT_NEAR(whole, split, 1e-13);
  EXPECT_NEAR(whole, std::exp(2.0) - 1.0, 1e-13);
}

TEST(CompositeRule, AlgebraicEndpointBehaviour) {
  // integrand with a non-polynomial endpoint singularity the kernel does not absorb
  fvc::KernelSpec k;
  k.c = 0.0;
  k.d = 1.0;
  k.right_point = 1.0;
  k.right_exp = -0.5;
  k.grade_points = {0.0, 1.0};
  auto g = [](double t) { return std::pow(t, 0.3) * std::cos(3.0 * t); };
  const double got = fvc::composite_rule(k).integrate(g);
  const double ref = oracle::tanh_sinh([&](double x, double, double db) { return std::pow(db, -0.5) * g(x); }, 0.0, 1.0);
  EXPECT_NEAR(got, ref, 1e-11);
}

TEST(CompositeRule, BreaksSplitJumps) {
  fvc::KernelSpec k;
  k.c = 0.0;
  k.d = 1.0;
  k.breaks = {0.37};
  auto step = [](double t) { return t < 0.37 ? 1.0 : 3.0; };
  EXPECT_NEAR(fvc::composite_rule(k).integrate(step), 0.37 + 3.0 * 0.63, 1e-13);
}
