#pragma once

// (alpha, beta) grid solves for one problem template.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "fvc/legendre.hpp"
#include "fvc/solver.hpp"
#include "fvc/variational.hpp"

namespace fvc {

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  Regime regime = Regime::CaseTwo;
  std::string status;
  double J = std::numeric_limits<double>::quiet_NaN();
  Vec k;
  double max_residual = std::numeric_limits<double>::quiet_NaN();
  std::string legendre = "NA";  // Pass, Fail or NA
  std::string diagnosis;
};

inline SweepRow sweep_cell(const ProblemSpec& base, double alpha, double beta, int n_quad, int n_nodes, double psd_tol) {
  ProblemSpec p = base;
  p.alpha = alpha;
  p.beta = beta;
  SweepRow row;
  row.alpha = alpha;
  row.beta = beta;
  row.regime = p.regime();
  try {
    const SolveOutcome s = solve_separable(p, n_quad);
    row.status = to_string(s.status);
    row.diagnosis = s.diagnosis;
    row.J = s.J;
    row.k = s.k;
    row.max_residual = s.residual;
    if (s.status == SolveStatus::Extremal && s.trajectory)
      row.legendre = legendre_check(p, *s.trajectory, n_nodes, psd_tol, n_quad).pass() ? "Pass" : "Fail";
  } catch (const SingularSystem&) {
    row.status = to_string(SolveStatus::Unsupported);
    row.diagnosis = "SINGULAR_SYSTEM";
  } catch (const Error&) {
    row.status = to_string(SolveStatus::Unsupported);
    row.diagnosis = "RUNTIME_ERROR";
  }
  return row;
}

/// One row per grid cell in alpha-major order, whatever the thread count.
inline std::vector<SweepRow> run_sweep(const ProblemSpec& base, const Vec& alphas, const Vec& betas, int threads,
                                       int n_quad = kDefaultQuadN, int n_nodes = kDefaultNodes,
                                       double psd_tol = kPsdTol) {
  const std::size_t cells = alphas.size() * betas.size();
  std::vector<SweepRow> rows(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++)
      rows[i] = sweep_cell(base, alphas[i / betas.size()], betas[i % betas.size()], n_quad, n_nodes, psd_tol);
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(cells)));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kSweepHeader = "alpha,beta,regime,status,J,k,max_residual,legendre,diagnosis";

inline std::string sweep_csv_row(const SweepRow& r) {
  std::string k;
  for (std::size_t i = 0; i < r.k.size(); ++i) k += (i ? ";" : "") + format_double(r.k[i]);
  return format_double(r.alpha) + "," + format_double(r.beta) + "," + to_string(r.regime) + "," + r.status + "," +
         format_double(r.J) + "," + k + "," + format_double(r.max_residual) + "," + r.legendre + "," + r.diagnosis;
}

}  // namespace fvc
