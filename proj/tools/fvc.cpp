// fvc: batch front end for the fractional variational toolkit.
//
// Exit codes: 0 success, 1 config/schema/usage error, 2 numerical runtime
// error, 3 no extremal or a failed check, 4 unsupported problem. A
// trajectory that does not fit the problem counts as an input error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fvc/fvc.hpp"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kNoExtremal = 3, kUnsupported = 4 };

struct Options {
  std::string config;
  std::string trajectory;
  std::string out;
  std::string format;
  int quad_n = 0;
  int threads = 0;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const fvc::Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

void emit(const Options& o, const fvc::RunConfig& c, const std::string& payload) {
  const std::string path = !o.out.empty() ? o.out : c.output_path;
  if (path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fvc::ConfigError(0, 0, "cannot write '" + path + "'");
  f << payload;
  if (!payload.empty() && payload.back() != '\n') f << '\n';
}

std::string format_of(const Options& o, const fvc::RunConfig& c, const char* fallback) {
  if (!o.format.empty()) return o.format;
  if (!c.output_format.empty()) return c.output_format;
  return fallback;
}

std::string csv_number(double v) { return fvc::format_double(v); }

fvc::RunConfig load(const Options& o) {
  fvc::RunConfig c = fvc::load_run_config(o.config);
  if (o.quad_n > 0) c.quad_n = o.quad_n;
  return c;
}

fvc::CalphaFunction load_checked_trajectory(const Options& o, const fvc::RunConfig& c) {
  if (o.trajectory.empty()) throw fvc::ConfigError(0, 0, "this command needs --trajectory");
  fvc::CalphaFunction x = fvc::load_trajectory(o.trajectory);
  if (x.dim() != c.problem.n) throw fvc::SchemaError("trajectory dimension does not match the problem");
  return x;
}

json outcome_json(const char* command, const fvc::ProblemSpec& p, const fvc::SolveOutcome& s, int quad_n) {
  json j;
  j["command"] = command;
  j["status"] = fvc::to_string(s.status);
  j["regime"] = fvc::to_string(s.regime);
  j["diagnosis"] = s.diagnosis;
  j["J"] = number(s.J);
  j["k"] = vector_json(s.k);
  j["x0"] = vector_json(s.x0);
  j["x1"] = vector_json(s.x1);
  j["residual"] = number(s.residual);
  if (s.trajectory) {
    json t = json::array(), xs = json::array(), ps = json::array();
    for (int i = 0; i <= 100; ++i) {
      const double tt = p.t0 + (p.t1 - p.t0) * i / 100.0;
      t.push_back(tt);
      xs.push_back(vector_json(fvc::evaluate(*s.trajectory, tt, quad_n)));
      ps.push_back(vector_json(s.trajectory->psi(tt)));
    }
    j["samples"] = {{"t", t}, {"x", xs}, {"psi", ps}};
    j["trajectory"] = fvc::trajectory_to_json(*s.trajectory);
  }
  return j;
}

std::string samples_csv(const fvc::ProblemSpec& p, const fvc::SolveOutcome& s, int quad_n) {
  std::ostringstream os;
  os << "t";
  for (std::size_t i = 1; i <= p.n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= p.n; ++i) os << ",psi" << i;
  os << '\n';
  if (!s.trajectory) return os.str();
  for (int i = 0; i <= 100; ++i) {
    const double t = p.t0 + (p.t1 - p.t0) * i / 100.0;
    os << csv_number(t);
    for (double v : fvc::evaluate(*s.trajectory, t, quad_n)) os << ',' << csv_number(v);
    for (double v : s.trajectory->psi(t)) os << ',' << csv_number(v);
    os << '\n';
  }
  return os.str();
}

int status_exit(fvc::SolveStatus s) {
  switch (s) {
    case fvc::SolveStatus::Extremal:
      return kOk;
    case fvc::SolveStatus::NoExtremal:
      return kNoExtremal;
    case fvc::SolveStatus::Unsupported:
      return kUnsupported;
  }
  return kRuntime;
}

int cmd_solve(const Options& o) {
  const fvc::RunConfig c = load(o);
  const fvc::SolveOutcome s = fvc::solve_separable(c.problem, c.quad_n);
  const std::string fmt = format_of(o, c, "json");
  emit(o, c, fmt == "csv" ? samples_csv(c.problem, s, c.quad_n) : outcome_json("solve", c.problem, s, c.quad_n).dump(2));
  if (!s.diagnosis.empty()) std::cerr << "fvc: " << fvc::to_string(s.status) << ": " << s.diagnosis << '\n';
  return status_exit(s.status);
}

int cmd_check_el(const Options& o) {
  const fvc::RunConfig c = load(o);
  const fvc::CalphaFunction x = load_checked_trajectory(o, c);
  const fvc::ElReport r = fvc::el_residual(c.problem, x, c.n_nodes, c.quad_n);
  const bool pass = r.max_abs <= c.tol_residual;
  if (format_of(o, c, "json") == "csv") {
    std::ostringstream os;
    os << "t";
    for (std::size_t i = 1; i <= c.problem.n; ++i) os << ",residual" << i;
    os << '\n';
    for (std::size_t i = 0; i < r.node_ts.size(); ++i) {
      os << csv_number(r.node_ts[i]);
      for (double v : r.residual_el[i]) os << ',' << csv_number(v);
      os << '\n';
    }
    emit(o, c, os.str());
  } else {
    json j;
    j["command"] = "check-el";
    j["regime"] = fvc::to_string(r.regime);
    j["note"] = r.note;
    j["pass"] = pass;
    j["tolerance"] = c.tol_residual;
    j["max_abs"] = number(r.max_abs);
    j["inferred_k"] = vector_json(r.inferred_k);
    j["k_fit_residual"] = number(r.k_fit_residual);
    json tr = json::array();
    for (const auto& d : r.residual_transversality) tr.push_back({{"name", d.name}, {"value", vector_json(d.value)}});
    j["transversality"] = tr;
    json nodes = json::array();
    for (std::size_t i = 0; i < r.node_ts.size(); ++i)
      nodes.push_back({{"t", r.node_ts[i]}, {"residual", vector_json(r.residual_el[i])}});
    j["nodes"] = nodes;
    emit(o, c, j.dump(2));
  }
  if (!pass) std::cerr << "fvc: residual " << r.max_abs << " exceeds " << c.tol_residual << '\n';
  return pass ? kOk : kNoExtremal;
}

// x0 + I^alpha c with c chosen so the fixed end values are met (zero when free).
fvc::CalphaFunction reference_candidate(const fvc::ProblemSpec& p) {
  const fvc::Vec x0 = p.x0_fixed ? *p.x0_fixed : fvc::Vec(p.n, 0.0);
  fvc::Vec c(p.n, 0.0);
  if (p.x1_fixed) {
    const double k = fvc::gamma(p.alpha + 1.0) / std::pow(p.t1 - p.t0, p.alpha);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = ((*p.x1_fixed)[i] - x0[i]) * k;
  }
  return fvc::CalphaFunction(p.t0, p.t1, p.alpha, x0, [c](double) { return c; });
}

int cmd_legendre(const Options& o) {
  const fvc::RunConfig c = load(o);
  const fvc::ProblemSpec& p = c.problem;
  fvc::CalphaFunction x;
  std::string source = "file";
  if (!o.trajectory.empty()) {
    x = load_checked_trajectory(o, c);
  } else {
    const fvc::SolveOutcome s = fvc::solve_separable(p, c.quad_n);
    if (s.status == fvc::SolveStatus::Extremal) {
      x = *s.trajectory;
      source = "extremal";
    } else {
      x = reference_candidate(p);
      source = "reference";
      std::cerr << "fvc: no closed-form extremal, probing the constant-psi candidate through the boundary data\n";
    }
  }
  const fvc::LegendreReport rep = fvc::legendre_check(p, x, c.n_nodes, c.tol_psd, c.quad_n);
  const double sigma = c.sigma.value_or(0.5 * (p.t0 + p.t1));
  fvc::Vec r(p.n, 0.0);
  if (c.direction)
    r = *c.direction;
  else if (rep.failure)
    r = rep.failure->witness;
  else
    r[0] = 1.0;
  const fvc::Vec eps = c.eps_list.empty() ? fvc::default_eps_list(p.t0, p.t1, sigma) : c.eps_list;
  const auto probe = fvc::second_variation_probe(p, x, sigma, eps, r, c.quad_n);
  if (format_of(o, c, "json") == "csv") {
    std::ostringstream os;
    os << "eps,delta2J\n";
    for (const auto& q : probe) os << csv_number(q.eps) << ',' << csv_number(q.delta2) << '\n';
    emit(o, c, os.str());
  } else {
    json j;
    j["command"] = "legendre";
    j["trajectory_source"] = source;
    j["verdict"] = rep.pass() ? "Pass" : "Fail";
    j["tolerance"] = rep.tolerance;
    j["node_ts"] = rep.node_ts;
    j["min_eigenvalues"] = vector_json(rep.min_eigenvalues);
    if (rep.failure)
      j["failure"] = {{"t", rep.failure->t},
                      {"eigenvalue", rep.failure->eigenvalue},
                      {"witness", vector_json(rep.failure->witness)}};
    json pj = json::array();
    for (const auto& q : probe) pj.push_back({{"eps", q.eps}, {"delta2J", number(q.delta2)}});
    j["probe"] = {{"sigma", sigma}, {"r", vector_json(r)}, {"kind", fvc::probe_kind(p.variant) == fvc::BumpKind::MeanValueBump ? "MeanValueBump" : "ConstantBump"}, {"values", pj}};
    emit(o, c, j.dump(2));
  }
  return rep.pass() ? kOk : kNoExtremal;
}

int cmd_dubois(const Options& o) {
  const fvc::RunConfig c = load(o);
  const fvc::ProblemSpec& p = c.problem;
  const fvc::Expr fe = fvc::parse(c.dubois_f, 1);
  const auto f = [&fe](double t) { return fvc::eval(fe, t, {}, {}); };
  const fvc::DuboisVariation dv = fvc::dubois_variation(f, p.alpha, p.beta, p.t0, p.t1, c.quad_n);
  const double h0 = dv.h.x0()[0];
  const double h1 = fvc::evaluate(dv.h, p.t1, c.quad_n)[0];
  const double pairing = fvc::dubois_pairing(f, dv.h, p.beta, c.quad_n);
  const bool ok = std::abs(h0) <= 1e-9 && std::abs(h1) <= 1e-9;
  if (format_of(o, c, "json") == "csv") {
    emit(o, c, "regime,k_const,h_t0,h_t1,pairing\n" + std::string(fvc::to_string(dv.regime)) + "," +
                   csv_number(dv.k_const) + "," + csv_number(h0) + "," + csv_number(h1) + "," + csv_number(pairing) + "\n");
  } else {
    json j;
    j["command"] = "dubois";
    j["f"] = c.dubois_f;
    j["regime"] = fvc::to_string(dv.regime);
    j["k_const"] = number(dv.k_const);
    j["h_t0"] = number(h0);
    j["h_t1"] = number(h1);
    j["pairing"] = number(pairing);
    j["endpoints_ok"] = ok;
    emit(o, c, j.dump(2));
  }
  return ok ? kOk : kNoExtremal;
}

int cmd_oracle(const Options& o) {
  const fvc::RunConfig c = load(o);
  const fvc::ProblemSpec& p = c.problem;
  fvc::MinimizeOptions mo;
  mo.n_quad = c.quad_n;
  const fvc::SolveOutcome d = fvc::direct_minimize(p, c.oracle_m, c.oracle_tol, c.oracle_max_iter, mo);
  std::optional<fvc::SolveOutcome> closed;
  try {
    closed = fvc::solve_separable(p, c.quad_n);
  } catch (const fvc::Error& e) {
    std::cerr << "fvc: closed form unavailable: " << e.what() << '\n';
  }
  if (format_of(o, c, "json") == "csv") {
    emit(o, c, samples_csv(p, d, c.quad_n));
  } else {
    json j = outcome_json("oracle", p, d, c.quad_n);
    j["iterations"] = d.iterations;
    j["grad_norm"] = number(d.grad_norm);
    j["m"] = c.oracle_m;
    if (closed && closed->status == fvc::SolveStatus::Extremal) {
      j["closed_form_J"] = number(closed->J);
      j["J_difference"] = number(d.J - closed->J);
    }
    emit(o, c, j.dump(2));
  }
  if (!d.diagnosis.empty()) std::cerr << "fvc: " << d.diagnosis << '\n';
  return status_exit(d.status);
}

int cmd_sweep(const Options& o) {
  const fvc::RunConfig c = load(o);
  if (!c.sweep_alpha || !c.sweep_beta) throw fvc::ConfigError(0, 0, "sweep needs a [sweep] section");
  int threads = o.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("FVC_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto rows = fvc::run_sweep(c.problem, c.sweep_alpha->values(), c.sweep_beta->values(), threads, c.quad_n,
                                   c.n_nodes, c.tol_psd);
  if (format_of(o, c, "csv") == "json") {
    json a = json::array();
    for (const auto& r : rows)
      a.push_back({{"alpha", r.alpha},
                   {"beta", r.beta},
                   {"regime", fvc::to_string(r.regime)},
                   {"status", r.status},
                   {"J", number(r.J)},
                   {"k", vector_json(r.k)},
                   {"max_residual", number(r.max_residual)},
                   {"legendre", r.legendre},
                   {"diagnosis", r.diagnosis}});
    emit(o, c, a.dump(2));
  } else {
    std::string out = std::string(fvc::kSweepHeader) + "\n";
    for (const auto& r : rows) out += fvc::sweep_csv_row(r) + "\n";
    emit(o, c, out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional calculus of variations toolkit"};
  app.require_subcommand(1);
  Options o;
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Cmd cmds[] = {
      {"solve", "closed-form extremal of a separable problem", cmd_solve},
      {"check-el", "Euler-Lagrange residuals of a trajectory", cmd_check_el},
      {"legendre", "Legendre check and second-variation probe", cmd_legendre},
      {"dubois", "Du Bois-Reymond variation diagnostics", cmd_dubois},
      {"oracle", "direct minimization of the functional", cmd_oracle},
      {"sweep", "solve over an (alpha, beta) grid", cmd_sweep},
  };
  int (*selected)(const Options&) = nullptr;
  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", o.config, "run configuration")->required();
    sub->add_option("--trajectory", o.trajectory, "trajectory JSON");
    sub->add_option("--out", o.out, "output path (default: stdout)");
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--quad-n", o.quad_n, "quadrature points per panel")->check(CLI::Range(1, 512));
    sub->add_option("--threads", o.threads, "worker threads for sweep (default: FVC_THREADS)")->check(CLI::PositiveNumber);
    sub->callback([&selected, run = c.run] { selected = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    return selected(o);
  } catch (const fvc::ConfigError& e) {
    std::cerr << "fvc: " << e.what() << '\n';
    return kConfig;
  } catch (const fvc::SchemaError& e) {
    std::cerr << "fvc: " << e.what() << '\n';
    return kConfig;
  } catch (const fvc::AdmissibilityError& e) {
    std::cerr << "fvc: trajectory does not fit the problem: " << e.what() << '\n';
    return kConfig;
  } catch (const fvc::Error& e) {
    std::cerr << "fvc: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "fvc: " << e.what() << '\n';
    return kRuntime;
  }
}
