#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fvc/special.hpp"

TEST(Gamma, IntegerAndHalfValues) {
  EXPECT_DOUBLE_EQ(fvc::gamma(1.0), 1.0);
  EXPECT_DOUBLE_EQ(fvc::gamma(5.0), 24.0);
  EXPECT_NEAR(fvc::gamma(0.5), 1.7724538509055160, 1e-15);
}

TEST(Gamma, MatchesStdTgammaOnRange) {
  for (double x = 0.01; x <= 50.0; x += 0.0731) {
    const double ref = std::tgamma(x);
    EXPECT_NEAR(fvc::gamma(x), ref, 1e-13 * ref) << "x=" << x;
  }
}

TEST(Gamma, Recurrence) {
  for (double x = 0.1; x <= 30.0; x += 0.137) {
    const double g1 = fvc::gamma(x + 1.0);
    EXPECT_LE(std::abs(g1 - x * fvc::gamma(x)), 1e-12 * g1) << "x=" << x;
  }
}

TEST(Gamma, RejectsNonPositive) {
  EXPECT_THROW(fvc::gamma(0.0), fvc::DomainError);
  EXPECT_THROW(fvc::gamma(-1.5), fvc::DomainError);
  EXPECT_THROW(fvc::gamma(std::nan("")), fvc::DomainError);
  EXPECT_THROW(fvc::gamma(INFINITY), fvc::DomainError);
}

TEST(Beta, KnownValues) {
  EXPECT_NEAR(fvc::beta(1.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(fvc::beta(0.5, 0.5), M_PI, 1e-14);
  EXPECT_NEAR(fvc::beta(2.0, 3.0), 1.0 / 12.0, 1e-16);
}

TEST(Beta, SymmetricAndLargeArguments) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 40.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(fvc::beta(a, b), fvc::beta(b, a), 4e-16 * fvc::beta(a, b));
  }
  // Gamma(200) overflows; the log-space path does not
  const double v = fvc::beta(200.0, 150.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(std::log(v), std::lgamma(200.0) + std::lgamma(150.0) - std::lgamma(350.0), 1e-9);
  EXPECT_THROW(fvc::beta(0.0, 1.0), fvc::DomainError);
  EXPECT_THROW(fvc::beta(1.0, -2.0), fvc::DomainError);
}

TEST(PowerInequality, Examples) {
  auto [l0, r0] = fvc::power_inequality_gap(0.5, 1.0, 1.0);
  EXPECT_EQ(l0, 0.0);
  EXPECT_EQ(r0, 0.0);
  auto [l1, r1] = fvc::power_inequality_gap(1.0, 1.0, 3.0);
  EXPECT_NEAR(l1, 4.0, 1e-14);
  EXPECT_NEAR(r1, 4.0, 1e-14);
  auto [l2, r2] = fvc::power_inequality_gap(0.5, 1.0, 4.0);
  EXPECT_NEAR(l2, 1.0, 1e-14);
  EXPECT_NEAR(r2, 0.5 * std::pow(3.0, 1.5), 1e-13);
}

TEST(PowerInequality, HoldsOnRandomTriples) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ua(1e-6, 1.0), us(1e-6, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = ua(rng);
    double s1 = us(rng), s2 = us(rng);
    if (s1 > s2) std::swap(s1, s2);
    auto [lhs, rhs] = fvc::power_inequality_gap(a, s1, s2);
    ASSERT_GE(lhs, 0.0);
    ASSERT_LE(lhs, rhs + 1e-12 * std::max(1.0, rhs)) << a << " " << s1 << " " << s2;
  }
}

TEST(PowerInequality, RejectsBadArguments) {
  EXPECT_THROW(fvc::power_inequality_gap(0.5, 2.0, 1.0), fvc::DomainError);
  EXPECT_THROW(fvc::power_inequality_gap(0.5, 0.0, 1.0), fvc::DomainError);
  EXPECT_THROW(fvc::power_inequality_gap(1.5, 1.0, 2.0), fvc::DomainError);
  EXPECT_THROW(fvc::power_inequality_gap(0.0, 1.0, 2.0), fvc::DomainError);
}
