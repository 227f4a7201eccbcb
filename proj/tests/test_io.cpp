#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "fvc/io.hpp"
#include "fvc/solver.hpp"
#include "oracle.hpp"

namespace {

const char* kMinimal = R"(# comment
[problem]
variant = "Simplest"
alpha = 0.5
beta = 0.5   # trailing comment
lagrangian = "y1^2"
x0 = [0.0]
x1 = [1.0]
)";

fvc::ConfigError config_error(const std::string& text) {
  try {
    fvc::parse_run_config(text);
  } catch (const fvc::ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError for:\n" << text;
  return fvc::ConfigError(0, 0, "none");
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const fvc::RunConfig c = fvc::parse_run_config(kMinimal);
  EXPECT_EQ(c.problem.variant, fvc::Variant::Simplest);
  EXPECT_EQ(c.problem.alpha, 0.5);
  EXPECT_EQ(c.problem.beta, 0.5);
  EXPECT_EQ(c.problem.t0, 0.0);
  EXPECT_EQ(c.problem.t1, 1.0);
  EXPECT_EQ(c.problem.x1_fixed->at(0), 1.0);
  EXPECT_EQ(c.lagrangian_text, "y1^2");
  EXPECT_EQ(c.quad_n, 64);
  EXPECT_EQ(c.n_nodes, 33);
  EXPECT_EQ(c.tol_residual, 1e-7);
  EXPECT_EQ(c.tol_psd, 1e-9);
  EXPECT_FALSE(c.sweep_alpha.has_value());
  EXPECT_EQ(c.output_format, "");
}

TEST(Config, AllSections) {
  const std::string text = std::string(kMinimal) + R"cfg(
[quadrature]
n = 96
[nodes]
n = 17
[tolerances]
residual = 1e-6
psd = 1e-8
[sweep]
alpha_start = 0.3
alpha_stop = 1.0
alpha_step = 0.1
beta_start = 0.3
beta_stop = 1.5
beta_step = 0.1
[output]
path = "out.csv"
format = "csv"
[legendre]
sigma = 0.4
eps = [0.1, 0.05]
r = [1.0]
[oracle]
m = 48
tol = 1e-9
max_iter = 100
[dubois]
f = "exp(t)"
)cfg";
  const fvc::RunConfig c = fvc::parse_run_config(text);
  EXPECT_EQ(c.quad_n, 96);
  EXPECT_EQ(c.n_nodes, 17);
  EXPECT_EQ(c.tol_residual, 1e-6);
  EXPECT_EQ(c.tol_psd, 1e-8);
  const fvc::Vec a = c.sweep_alpha->values(), b = c.sweep_beta->values();
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(b.size(), 13u);
  EXPECT_EQ(a.back(), 1.0);
  EXPECT_EQ(b[2], 0.5);
  EXPECT_EQ(c.output_path, "out.csv");
  EXPECT_EQ(c.output_format, "csv");
  EXPECT_EQ(*c.sigma, 0.4);
  EXPECT_EQ(c.eps_list, (fvc::Vec{0.1, 0.05}));
  EXPECT_EQ(c.direction->at(0), 1.0);
  EXPECT_EQ(c.oracle_m, 48);
  EXPECT_EQ(c.oracle_tol, 1e-9);
  EXPECT_EQ(c.oracle_max_iter, 100);
  EXPECT_EQ(c.dubois_f, "exp(t)");
}

TEST(Config, ErrorsCarryLocation) {
  fvc::ConfigError e = config_error("[problem]\nvariant = \"Simplest\"\nalpha = \n");
  EXPECT_EQ(e.line(), 3);
  e = config_error("[problem]\nvariant = \"Simplest\nalpha = 0.5\n");
  EXPECT_EQ(e.line(), 2);
  e = config_error("[problem\n");
  EXPECT_EQ(e.line(), 1);
  e = config_error(std::string(kMinimal) + "alpha = 0.7\n");
  EXPECT_EQ(e.line(), 9);
  e = config_error(std::string(kMinimal) + "[mystery]\n");
  EXPECT_EQ(e.line(), 9);
  e = config_error(std::string(kMinimal) + "[output]\nformat = \"xml\"\n");
  EXPECT_EQ(e.line(), 10);
  EXPECT_EQ(e.column(), 10);
  e = config_error("[problem]\nvariant = \"Simplest\"\nalpha = 0.5\nbeta = 0.5\nlagrangian = \"y1 +\"\nx0 = [0.0]\nx1 = [1.0]\n");
  EXPECT_EQ(e.line(), 5);
  EXPECT_EQ(e.column(), 15 + 4);
  e = config_error("[problem]\nvariant = \"Simplest\"\nalpha = 1.5\nbeta = 0.5\nlagrangian = \"y1^2\"\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.column(), 9);
  e = config_error("[problem]\nvariant = \"Sideways\"\n");
  EXPECT_EQ(e.line(), 2);
  e = config_error("[problem]\nvariant = \"Simplest\"\nalpha = 0.5\nlagrangian = \"y1^2\"\n");  // beta missing
  EXPECT_EQ(e.line(), 1);
  e = config_error("[problem]\nvariant = \"Simplest\"\nalpha = 0.5\nbeta = 0.5\nlagrangian = \"y1^2\"\nx0 = [0.0]\n");
  EXPECT_EQ(e.line(), 1);  // Simplest needs x1
  e = config_error(std::string(kMinimal) + "[sweep]\nalpha_start = 0.2\nalpha_stop = 1.5\nalpha_step = 0.1\n"
                                           "beta_start = 0.1\nbeta_stop = 1.0\nbeta_step = 0.1\n");
  EXPECT_EQ(e.line(), 11);
  e = config_error(std::string(kMinimal) + "[sweep]\nalpha_start = 0.2\nalpha_stop = 1.0\nalpha_step = 0\n"
                                           "beta_start = 0.1\nbeta_stop = 1.0\nbeta_step = 0.1\n");
  EXPECT_EQ(e.line(), 12);
}

TEST(Config, ShippedFilesLoad) {
  for (const char* name : {"fixed_ends", "fixed_ends_no_extremal", "free_start", "bolza_quadratic", "bolza_linear", "legendre_fail",
                           "dubois", "sweep_fixed_ends"}) {
    EXPECT_NO_THROW(fvc::load_run_config(std::string(FVC_CONFIG_DIR) + "/" + name + ".toml")) << name;
  }
  EXPECT_THROW(fvc::load_run_config(std::string(FVC_CONFIG_DIR) + "/bad.toml"), fvc::ConfigError);
  EXPECT_THROW(fvc::load_run_config("/nonexistent/config.toml"), fvc::ConfigError);
}

TEST(Grid, InclusiveAndRounded) {
  const fvc::GridRange g{0.3, 1.0, 0.1};
  const fvc::Vec v = g.values();
  ASSERT_EQ(v.size(), 8u);
  EXPECT_EQ(v[4], 0.7);
  EXPECT_EQ((fvc::GridRange{0.5, 0.5, 0.1}.values()), fvc::Vec{0.5});
}

TEST(Trajectory, RoundTripPreservesTheFunction) {
  const fvc::SolveOutcome s = fvc::solve_separable(oracle::fixed_ends_problem(0.7, 0.5));
  ASSERT_TRUE(s.trajectory);
  const nlohmann::json j = fvc::trajectory_to_json(*s.trajectory);
  const fvc::CalphaFunction back = fvc::trajectory_from_json(nlohmann::json::parse(j.dump()));
  for (double t : {0.0, 0.2, 0.5, 0.9, 0.999, 1.0})
    EXPECT_NEAR(fvc::evaluate(back, t)[0], fvc::evaluate(*s.trajectory, t)[0], 1e-10) << t;
  for (double t : {0.1, 0.6, 0.99}) EXPECT_NEAR(back.psi(t)[0], s.trajectory->psi(t)[0], 1e-9 * std::abs(s.trajectory->psi(t)[0]));
  EXPECT_LE(fvc::el_residual(oracle::fixed_ends_problem(0.7, 0.5), back).max_abs, 1e-7);
  // wrapped as in solve output
  nlohmann::json wrapped;
  wrapped["trajectory"] = j;
  EXPECT_NO_THROW(fvc::trajectory_from_json(wrapped));
}

TEST(Trajectory, JumpsKeepOneSidedValues) {
  nlohmann::json j = {{"t0", 0.0},          {"t1", 1.0},
                      {"alpha", 1.0},       {"x0", {0.0}},
                      {"psi_nodes", {0.0, 0.5, 0.5, 1.0}},
                      {"psi_values", {{1.0}, {1.0}, {-1.0}, {-1.0}}},
                      {"jumps", {0.5}}};
  const fvc::CalphaFunction x = fvc::trajectory_from_json(j);
  EXPECT_TRUE(x.is_jump(0.5));
  EXPECT_EQ(x.psi(0.25)[0], 1.0);
  EXPECT_EQ(x.psi(0.75)[0], -1.0);
  EXPECT_NEAR(fvc::evaluate(x, 1.0)[0], 0.0, 1e-14);
  EXPECT_NEAR(fvc::evaluate(x, 0.5)[0], 0.5, 1e-14);
  // written and re-read, the jump survives
  const fvc::CalphaFunction y = fvc::trajectory_from_json(fvc::trajectory_to_json(x));
  EXPECT_EQ(y.jumps(), x.jumps());
  EXPECT_NEAR(fvc::evaluate(y, 0.8)[0], fvc::evaluate(x, 0.8)[0], 1e-13);
}

TEST(Trajectory, SchemaErrors) {
  const nlohmann::json good = {{"t0", 0.0}, {"t1", 1.0}, {"alpha", 0.5}, {"x0", {0.0}},
                               {"psi_nodes", {0.0, 1.0}}, {"psi_values", {{1.0}, {1.0}}}};
  EXPECT_NO_THROW(fvc::trajectory_from_json(good));
  auto broken = [&](auto edit) {
    nlohmann::json j = good;
    edit(j);
    return j;
  };
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j.erase("alpha"); })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["t0"] = "zero"; })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["alpha"] = 1.5; })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["psi_values"] = {{1.0}}; })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["psi_values"] = {{1.0, 2.0}, {1.0, 2.0}}; })),
               fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["psi_nodes"] = {1.0, 0.0}; })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["psi_nodes"] = {0.0, 2.0}; })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(broken([](auto& j) { j["jumps"] = {1.0}; })), fvc::SchemaError);
  EXPECT_THROW(fvc::trajectory_from_json(nlohmann::json::array()), fvc::SchemaError);
  EXPECT_THROW(fvc::load_trajectory("/nonexistent/trajectory.json"), fvc::SchemaError);
}
