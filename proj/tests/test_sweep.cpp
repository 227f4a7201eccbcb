#include <gtest/gtest.h>

#include <cmath>

#include "fvc/sweep.hpp"
#include "oracle.hpp"

TEST(Sweep, GridOrderAndClassification) {
  const fvc::Vec alphas{0.4, 0.7, 1.0}, betas{0.3, 0.7, 1.2};
  const auto rows = fvc::run_sweep(oracle::fixed_ends_problem(0.5, 0.5), alphas, betas, 4);
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].alpha, alphas[i / 3]);
    EXPECT_EQ(rows[i].beta, betas[i % 3]);
    if (rows[i].beta <= rows[i].alpha) {
      EXPECT_EQ(rows[i].status, "Extremal");
      EXPECT_EQ(rows[i].legendre, "Pass");
      EXPECT_EQ(rows[i].regime, fvc::Regime::CaseTwo);
      const double q = (2 * rows[i].alpha - rows[i].beta) * std::pow(std::tgamma(rows[i].alpha), 2);
      EXPECT_NEAR(rows[i].k.at(0), 2 * q, 1e-8 * q);
    } else {
      EXPECT_EQ(rows[i].status, "NoExtremal");
      EXPECT_EQ(rows[i].legendre, "NA");
      EXPECT_EQ(rows[i].diagnosis, "CASE1_FORCES_CONSTANT");
    }
  }
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  const fvc::Vec alphas{0.5, 0.9}, betas{0.4, 0.5, 1.1};
  const auto one = fvc::run_sweep(oracle::free_start_problem(0.5, 0.5), alphas, betas, 1);
  const auto many = fvc::run_sweep(oracle::free_start_problem(0.5, 0.5), alphas, betas, 8);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(fvc::sweep_csv_row(one[i]), fvc::sweep_csv_row(many[i]));
}

TEST(Sweep, ErrorsBecomeRows) {
  const auto rows = fvc::run_sweep(oracle::problem(fvc::Variant::Bolza, 0.5, 0.5, "y1^2"), {0.5}, {0.5}, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "Unsupported");
  EXPECT_EQ(rows[0].diagnosis, "SINGULAR_SYSTEM");
}

TEST(Sweep, CsvFormatting) {
  EXPECT_EQ(std::string(fvc::kSweepHeader), "alpha,beta,regime,status,J,k,max_residual,legendre,diagnosis");
  EXPECT_EQ(fvc::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(fvc::format_double(std::nan("")), "");
  EXPECT_EQ(std::stod(fvc::format_double(M_PI)), M_PI);
  fvc::SweepRow r;
  r.alpha = 0.5;
  r.beta = 0.25;
  r.status = "Extremal";
  r.J = 2.0;
  r.k = {1.0, -1.5};
  r.max_residual = 1e-12;
  r.legendre = "Pass";
  EXPECT_EQ(fvc::sweep_csv_row(r), "0.5,0.25,CaseTwo,Extremal,2,1;-1.5,9.9999999999999998e-13,Pass,");
}
