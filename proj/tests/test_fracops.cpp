#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fvc/fracops.hpp"
#include "oracle.hpp"

using fvc::CalphaFunction;

TEST(RlIntegralLeft, PowerRuleTable) {
  for (double mu : {0.0, 0.5, 1.0, 2.0})
    for (double a : {0.3, 0.5, 0.7, 1.0})
      for (double t : {0.1, 0.5, 1.0}) {
        const double got = fvc::rl_integral_left([mu](double s) { return std::pow(s, mu); }, a, 0.0, t);
        const double ref = std::tgamma(mu + 1.0) / std::tgamma(mu + a + 1.0) * std::pow(t, mu + a);
        EXPECT_NEAR(got, ref, 1e-10) << mu << " " << a << " " << t;
      }
}

TEST(RlIntegralLeft, Examples) {
  EXPECT_NEAR(fvc::rl_integral_left([](double s) { return std::sqrt(s); }, 0.5, 0.0, 1.0), 0.8862269254527580, 1e-12);
  EXPECT_NEAR(fvc::rl_integral_left([](double s) { return std::cos(s); }, 1.0, 0.0, M_PI / 2), 1.0, 1e-13);
  EXPECT_EQ(fvc::rl_integral_left([](double) { return 1.0; }, 0.4, 0.0, 0.0), 0.0);
  EXPECT_EQ(fvc::rl_integral_left([](double s) { return s * 7; }, 0.0, 0.0, 0.5), 3.5);
  EXPECT_THROW(fvc::rl_integral_left([](double) { return 1.0; }, 0.5, 0.0, -0.1), fvc::DomainError);
}

TEST(RlIntegralLeft, Linearity) {
  auto f = [](double s) { return std::sin(2 * s); };
  auto g = [](double s) { return 1.0 + s * s; };
  for (double a : {0.3, 0.8}) {
    const double lhs = fvc::rl_integral_left([&](double s) { return 2.5 * f(s) - 1.5 * g(s); }, a, 0.0, 0.9);
    const double rhs = 2.5 * fvc::rl_integral_left(f, a, 0.0, 0.9) - 1.5 * fvc::rl_integral_left(g, a, 0.0, 0.9);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));
  }
}

TEST(RlIntegralRight, Examples) {
  const double t1 = 2.0;
  for (double a : {0.25, 0.5, 1.0})
    for (double t : {0.0, 1.0, 1.9}) {
      const double got = fvc::rl_integral_right([](double) { return 1.0; }, a, t1, t);
      EXPECT_NEAR(got, std::pow(t1 - t, a) / std::tgamma(a + 1.0), 1e-13);
    }
  EXPECT_NEAR(fvc::rl_integral_right([](double) { return 3.0; }, 1.0, t1, 0.5), 4.5, 1e-13);
  // f = (t1 - tau)^0.5 at order 0.5 reduces to B(1.5, 0.5)/Gamma(0.5) (t1 - t) = Gamma(1.5) (t1 - t)
  for (double t : {0.0, 0.7, 1.5}) {
    const double got = fvc::rl_integral_right([&](double s) { return std::sqrt(t1 - s); }, 0.5, t1, t);
    const double riemann = oracle::tanh_sinh(
        [&](double, double da, double db) { return std::pow(da, -0.5) * std::sqrt(db); }, t, t1) / std::tgamma(0.5);
    EXPECT_NEAR(got, riemann, 1e-12);
    EXPECT_NEAR(got, std::tgamma(1.5) * (t1 - t), 1e-12);
  }
  EXPECT_THROW(fvc::rl_integral_right([](double) { return 1.0; }, 0.5, t1, 2.5), fvc::DomainError);
}

TEST(CalphaFunction, RepresentationInvariants) {
  const CalphaFunction c = CalphaFunction::scalar(0.0, 1.0, 0.5, 2.0, [](double) { return 0.0; });
  EXPECT_EQ(fvc::evaluate(c, 0.0)[0], 2.0);
  EXPECT_EQ(fvc::evaluate(c, 0.6)[0], 2.0);
  EXPECT_EQ(fvc::caputo_left(c, 0.3).value[0], 0.0);
  EXPECT_THROW(CalphaFunction::scalar(1.0, 1.0, 0.5, 0.0, [](double) { return 0.0; }), fvc::DomainError);
  EXPECT_THROW(CalphaFunction::scalar(0.0, 1.0, 1.2, 0.0, [](double) { return 0.0; }), fvc::DomainError);
  EXPECT_THROW(CalphaFunction::scalar(0.0, 1.0, 0.0, 0.0, [](double) { return 0.0; }), fvc::DomainError);
  EXPECT_THROW(fvc::evaluate(c, 1.5), fvc::DomainError);
}

TEST(CalphaFunction, EvaluateExamples) {
  const CalphaFunction lin = CalphaFunction::scalar(0.0, 1.0, 1.0, 0.0, [](double) { return 1.0; });
  for (double t : {0.0, 0.25, 1.0}) EXPECT_NEAR(fvc::evaluate(lin, t)[0], t, 1e-15);
  const double g = std::tgamma(1.5);
  const CalphaFunction root = CalphaFunction::scalar(0.0, 1.0, 0.5, 0.0, [g](double) { return g; });
  EXPECT_NEAR(fvc::evaluate(root, 0.49)[0], 0.7, 1e-14);
  EXPECT_NEAR(fvc::caputo_left(root, 0.3).value[0], 0.8862269254527580, 1e-15);
  const CalphaFunction one = CalphaFunction::scalar(0.0, 1.0, 0.5, 0.0, [](double) { return 1.0; });
  EXPECT_EQ(fvc::caputo_left(one, 0.77).value[0], 1.0);
}

TEST(CalphaFunction, CaputoMatchesL1Scheme) {
  // L1 finite-difference Caputo derivative of t^alpha should approach Gamma(alpha+1)
  const double a = 0.5;
  const int N = 4000;
  const double T = 1.0, h = T / N;
  double sum = 0.0;
  for (int j = 0; j < N; ++j) {
    const double bj = std::pow(N - j, 1.0 - a) - std::pow(N - j - 1, 1.0 - a);
    sum += bj * (std::pow((j + 1) * h, a) - std::pow(j * h, a));
  }
  const double l1 = sum * std::pow(h, -a) / std::tgamma(2.0 - a);
  const double g = std::tgamma(a + 1.0);
  const CalphaFunction x = CalphaFunction::scalar(0.0, 1.0, a, 0.0, [g](double) { return g; });
  EXPECT_NEAR(fvc::caputo_left(x, 1.0).value[0], l1, 5e-3);
}

TEST(CalphaFunction, PiecewisePsiAndJumps) {
  auto zero = [](double) { return fvc::Vec{0.0}; };
  auto one = [](double) { return fvc::Vec{1.0}; };
  const CalphaFunction x(0.0, 1.0, 0.6, {0.0}, {{0.0, 0.4, zero}, {0.4, 1.0, one}}, {0.4});
  EXPECT_TRUE(x.is_jump(0.4));
  EXPECT_FALSE(x.is_jump(0.5));
  const fvc::CaputoValue at = fvc::caputo_left(x, 0.4);
  EXPECT_TRUE(at.at_jump);
  EXPECT_EQ(at.value[0], 0.0);  // left limit
  for (double t : {0.2, 0.4, 0.55, 0.9, 1.0}) {
    const double ref = t <= 0.4 ? 0.0 : std::pow(t - 0.4, 0.6) / std::tgamma(1.6);
    EXPECT_NEAR(fvc::evaluate(x, t)[0], ref, 1e-13) << t;
  }
  EXPECT_THROW(CalphaFunction(0.0, 1.0, 0.6, {0.0}, {{0.0, 0.4, zero}, {0.5, 1.0, one}}, {}), fvc::DomainError);
  EXPECT_THROW(CalphaFunction(0.0, 1.0, 0.6, {0.0}, {{0.0, 0.4, zero}, {0.4, 1.0, one}}, {0.7}), fvc::DomainError);
}

TEST(CalphaFunction, RepresentationIdentityAgainstOracle) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  for (double a : {0.3, 0.5, 0.7, 1.0}) {
    const double c0 = c(rng), c1 = c(rng), c2 = c(rng), x0 = c(rng);
    auto psi = [=](double t) { return c0 + c1 * t + c2 * t * t; };
    const CalphaFunction x = CalphaFunction::scalar(0.0, 1.0, a, x0, psi);
    for (double t : {0.05, 0.3, 0.8, 1.0}) {
      EXPECT_NEAR(fvc::evaluate(x, t)[0] - x0, oracle::rl_left(psi, a, 0.0, t), 1e-10) << a << " " << t;
    }
  }
}

TEST(Composition, Residuals) {
  const auto one = fvc::composition_residual([](double) { return 1.0; }, 0.4, 64, 11);
  EXPECT_EQ(one.structural, 0.0);
  const auto s = fvc::composition_residual([](double t) { return std::sin(t); }, 0.5, 64, 21);
  EXPECT_EQ(s.structural, 0.0);
  EXPECT_LE(s.quadrature, 1e-10);
  const auto q = fvc::composition_residual([](double t) { return t * t; }, 1.0, 64, 21);
  EXPECT_LE(q.quadrature, 1e-12);
}

TEST(SOperator, ConstantClosedForm) {
  for (double a : {0.2, 0.5, 0.9, 1.0})
    for (double b : {0.3, 0.5, 1.0, 1.7})
      for (double t : {0.0, 0.4, 0.99}) {
        const fvc::SValue v = fvc::s_operator([](double) { return 1.0; }, a, b, 0.0, 1.0, t);
        EXPECT_NEAR(v.value, std::tgamma(b) / std::tgamma(a + b) * std::pow(1.0 - t, a), 1e-10) << a << " " << b;
        EXPECT_FALSE(v.extended);
      }
}

TEST(SOperator, AgreesWithOracleAndExtendsAtT1) {
  auto a = [](double s) { return std::cos(s); };
  for (double t : {0.0, 0.3, 0.9}) {
    EXPECT_NEAR(fvc::s_operator(a, 0.5, 1.5, 0.0, 1.0, t).value, oracle::s_op(a, 0.5, 1.5, 1.0, t), 1e-11);
    EXPECT_NEAR(fvc::s_operator(a, 0.7, 0.4, 0.0, 1.0, t).value, oracle::s_op(a, 0.7, 0.4, 1.0, t), 1e-10);
  }
  const fvc::SValue end = fvc::s_operator(a, 0.5, 1.5, 0.0, 1.0, 1.0);
  EXPECT_EQ(end.value, 0.0);
  EXPECT_TRUE(end.extended);
  EXPECT_EQ(fvc::s_operator([](double) { return 0.0; }, 0.5, 0.5, 0.0, 1.0, 0.3).value, 0.0);
  EXPECT_THROW(fvc::s_operator(a, 0.5, 0.5, 0.0, 1.0, 1.2), fvc::DomainError);
  EXPECT_THROW(fvc::s_operator(a, 1.5, 0.5, 0.0, 1.0, 0.2), fvc::DomainError);
}

TEST(SOperator, ContinuityNearT1) {
  // |Sa(s2) - Sa(s1)| shrinks with |s2 - s1|
  auto a = [](double s) { return 1.0 + s * s; };
  double prev = INFINITY;
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double jump = std::abs(fvc::s_operator(a, 0.6, 0.8, 0.0, 1.0, 0.5 + d).value -
                                 fvc::s_operator(a, 0.6, 0.8, 0.0, 1.0, 0.5).value);
    EXPECT_LT(jump, prev);
    prev = jump;
  }
  EXPECT_LT(prev, 1e-3);
}
