#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "ccmv/backtest.hpp"
#include "ccmv/io.hpp"
#include "ccmv/oracle.hpp"
#include "ccmv/synthetic.hpp"

using namespace ccmv;
using io::json;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitInputError = 1;
constexpr int kExitCapped = 2;

/// Everything a run needs, filled from the command line.
struct RunManifest {
  std::string spec_path;
  std::string returns_path;
  std::vector<int> k;
  double tau = 0.5;
  std::string solver = "pd";
  std::vector<std::string> solvers{"pd", "padm", "oracle"};
  SolverConfig cfg;
  int window = 48;
  std::string reference = "oracle";
  std::string reference_file;
  std::uint64_t seed = 1;
  int n = 0;
  std::vector<int> sizes{226, 476};
  int jobs = 1;
  std::string out;
  std::string emit = "json";
};

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CCMV_LOG")) {
    const std::string s(level);
    if (s == "error") spdlog::set_level(spdlog::level::err);
    else if (s == "info") spdlog::set_level(spdlog::level::info);
    else if (s == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("CCMV_LOG='{}' not recognized; expected error, info or debug", s);
  }
  spdlog::set_pattern("[%l] %v");
}

void add_solver_flags(CLI::App* cmd, RunManifest& m) {
  cmd->add_option("--rho0", m.cfg.rho0, "initial penalty (raised to lambda_max(A)+1 if smaller)");
  cmd->add_option("--zeta", m.cfg.zeta, "penalty growth factor");
  cmd->add_option("--eps-inner", m.cfg.eps_inner, "inner tolerance");
  cmd->add_option("--eps-outer", m.cfg.eps_outer, "outer tolerance");
  cmd->add_option("--max-inner", m.cfg.max_inner, "inner iteration cap");
  cmd->add_option("--max-outer", m.cfg.max_outer, "outer iteration cap");
}

void add_input_flags(CLI::App* cmd, RunManifest& m) {
  auto* spec = cmd->add_option("--spec", m.spec_path, "problem JSON {A, mu, tau, k}")
                   ->check(CLI::ExistingFile);
  cmd->add_option("--returns", m.returns_path, "returns CSV (moments are estimated from it)")
      ->check(CLI::ExistingFile)
      ->excludes(spec);
  cmd->add_option("--n", m.n, "size of a seeded synthetic instance when no input is given");
  cmd->add_option("--seed", m.seed, "seed for synthetic generation");
}

/// Loads the instance named by the manifest. Flags override values in the
/// JSON file.
ProblemSpec load_problem(const RunManifest& m, int k, bool tau_given) {
  ProblemSpec spec;
  if (!m.spec_path.empty()) {
    spec = io::read_problem_json(m.spec_path);
    if (tau_given) spec.tau = m.tau;
  } else if (!m.returns_path.empty()) {
    const MomentEstimate est = estimate_moments(io::read_returns_csv(m.returns_path));
    spec.A = est.A;
    spec.mu = est.mu;
    spec.tau = m.tau;
  } else if (m.n > 0) {
    spec = synthetic_factor_problem(m.n, k, m.tau, m.seed);
  } else {
    throw Error(ErrorCode::BadConfig, "one of --spec, --returns or --n is required");
  }
  spec.k = k;
  validate_problem(spec);
  return spec;
}

/// Writes to --out when given, otherwise to stdout.
void emit_text(const RunManifest& m, const std::string& text) {
  if (m.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(m.out);
  if (!f) throw Error(ErrorCode::BadConfig, "cannot write '" + m.out + "'");
  f << text;
}

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string csv_optional(const std::optional<double>& v) { return v ? csv_number(*v) : ""; }

json json_optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_solve(const RunManifest& m, bool tau_given) {
  const ProblemSpec spec = load_problem(m, m.k.front(), tau_given);
  const Solution sol = solve_with(solver_kind_from_string(m.solver), spec, m.cfg, Exec::Parallel);
  spdlog::info("solve: solver={} f={} |support|={} status={}", sol.solver, sol.objective,
               sol.support.size(), to_string(sol.status));
  if (m.emit == "csv") {
    std::ostringstream s;
    io::write_trace_csv(s, sol);
    emit_text(m, s.str());
  } else {
    emit_text(m, io::solution_to_json(sol).dump(2) + "\n");
  }
  return sol.status == SolveStatus::Converged ? kExitConverged : kExitCapped;
}

int cmd_backtest(const RunManifest& m) {
  if (m.returns_path.empty()) throw Error(ErrorCode::BadConfig, "backtest needs --returns");
  BacktestConfig bc;
  bc.window = m.window;
  bc.solver = solver_kind_from_string(m.solver);
  bc.solver_cfg = m.cfg;
  bc.tau = m.tau;
  bc.k = m.k.front();
  const BacktestReport rep = rolling_horizon(io::read_returns_csv(m.returns_path), bc, Exec::Parallel);
  if (m.emit == "csv") {
    std::ostringstream s;
    io::write_weights_csv(s, rep);
    emit_text(m, s.str());
  } else {
    emit_text(m, io::backtest_to_json(rep).dump(2) + "\n");
  }
  for (bool flagged : rep.window_flagged)
    if (flagged) return kExitCapped;
  return kExitConverged;
}

/// Reference solutions from --reference-file: either one Solution JSON used
/// for every k, or an object mapping k to a Solution JSON.
std::map<int, Solution> load_reference_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  std::map<int, Solution> out;
  if (j.contains("weights")) {
    out[0] = io::solution_from_json(j);
  } else {
    for (auto it = j.begin(); it != j.end(); ++it) out[std::stoi(it.key())] = io::solution_from_json(*it);
  }
  return out;
}

struct CompareRow {
  std::string solver;
  int k = 0;
  bool skipped = false;
  std::string note;
  std::string status;
  double objective = 0.0;
  InSampleStats stats;
  double seconds = 0.0;
  std::optional<double> gap_return, gap_risk, gap_sharpe;
};

int cmd_compare(const RunManifest& m, bool tau_given) {
  std::map<int, Solution> ref_file;
  if (m.reference == "mosek-file") {
    if (m.reference_file.empty())
      throw Error(ErrorCode::BadConfig, "--reference mosek-file needs --reference-file");
    ref_file = load_reference_file(m.reference_file);
  }

  std::vector<CompareRow> rows;
  for (int k : m.k) {
    const ProblemSpec spec = load_problem(m, k, tau_given);
    std::optional<InSampleStats> ref;
    if (m.reference == "mosek-file") {
      auto it = ref_file.count(k) ? ref_file.find(k) : ref_file.find(0);
      if (it == ref_file.end()) throw Error(ErrorCode::BadConfig, "no reference for k=" + std::to_string(k));
      ref = in_sample_stats(spec, it->second.weights);
    } else {
      try {
        ref = in_sample_stats(spec, solve_with(solver_kind_from_string(m.reference), spec, m.cfg,
                                               Exec::Parallel).weights);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooLarge) throw;
        spdlog::warn("compare: reference {} skipped for k={}: {}", m.reference, k, e.what());
      }
    }

    for (const auto& name : m.solvers) {
      CompareRow row;
      row.solver = name;
      row.k = k;
      try {
        const auto start = std::chrono::steady_clock::now();
        const Solution sol = solve_with(solver_kind_from_string(name), spec, m.cfg, Exec::Parallel);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.status = to_string(sol.status);
        row.objective = sol.objective;
        row.stats = in_sample_stats(spec, sol.weights);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooLarge) throw;
        row.skipped = true;
        row.note = e.what();
        rows.push_back(row);
        continue;
      }
      if (ref) {
        row.gap_return = gap(row.stats.ret, ref->ret);
        row.gap_risk = gap(row.stats.risk, ref->risk);
        if (row.stats.sharpe && ref->sharpe) row.gap_sharpe = gap(*row.stats.sharpe, *ref->sharpe);
      }
      rows.push_back(row);
    }
  }

  if (m.emit == "csv") {
    std::ostringstream s;
    s << "solver,k,status,objective,return,risk,sharpe,seconds,gap_return,gap_risk,gap_sharpe,skipped\n";
    for (const auto& r : rows) {
      s << r.solver << ',' << r.k << ',';
      if (r.skipped) {
        s << "skipped,,,,,,,,,1\n";
        continue;
      }
      s << r.status << ',' << csv_number(r.objective) << ',' << csv_number(r.stats.ret) << ','
        << csv_number(r.stats.risk) << ',' << csv_optional(r.stats.sharpe) << ','
        << csv_number(r.seconds) << ',' << csv_optional(r.gap_return) << ','
        << csv_optional(r.gap_risk) << ',' << csv_optional(r.gap_sharpe) << ",0\n";
    }
    emit_text(m, s.str());
  } else {
    json out = json::array();
    for (const auto& r : rows) {
      json row{{"solver", r.solver}, {"k", r.k}, {"skipped", r.skipped}};
      if (r.skipped) {
        row["note"] = r.note;
      } else {
        row["status"] = r.status;
        row["objective"] = r.objective;
        row["return"] = r.stats.ret;
        row["risk"] = r.stats.risk;
        row["sharpe"] = json_optional(r.stats.sharpe);
        row["seconds"] = r.seconds;
        row["gap_return"] = json_optional(r.gap_return);
        row["gap_risk"] = json_optional(r.gap_risk);
        row["gap_sharpe"] = json_optional(r.gap_sharpe);
      }
      out.push_back(row);
    }
    emit_text(m, out.dump(2) + "\n");
  }
  return kExitConverged;
}

struct BenchCell {
  int n = 0;
  int k = 0;
  std::string solver;
  double seconds = 0.0;
  double objective = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  std::string status;
};

int cmd_bench(const RunManifest& m) {
  std::vector<BenchCell> cells;
  for (int n : m.sizes)
    for (int k : m.k)
      for (const auto& s : m.solvers) {
        if (k > n) throw Error(ErrorCode::BadK, "k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
        cells.push_back({n, k, s});
      }

  const int count = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(m.jobs)
  for (int c = 0; c < count; ++c) {
    BenchCell& cell = cells[c];
    const ProblemSpec spec = synthetic_factor_problem(cell.n, cell.k, m.tau, m.seed);
    const auto start = std::chrono::steady_clock::now();
    const Solution sol = solve_with(solver_kind_from_string(cell.solver), spec, m.cfg);
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    cell.objective = sol.objective;
    cell.outer_iterations = static_cast<int>(sol.trace.size());
    for (const auto& r : sol.trace) cell.inner_iterations += r.inner_iterations;
    cell.status = to_string(sol.status);
  }

  std::ostringstream s;
  s << "n,k,solver,seconds,log_seconds,objective,outer_iterations,inner_iterations,status\n";
  for (const auto& c : cells)
    s << c.n << ',' << c.k << ',' << c.solver << ',' << csv_number(c.seconds) << ','
      << csv_number(std::log(c.seconds)) << ',' << csv_number(c.objective) << ','
      << c.outer_iterations << ',' << c.inner_iterations << ',' << c.status << '\n';
  emit_text(m, s.str());
  return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  RunManifest m;
  CLI::App app{"Cardinality-constrained mean-variance portfolio solver"};
  app.require_subcommand(1);
  const std::vector<std::string> solver_names{"pd", "padm", "oracle"};

  auto* solve = app.add_subcommand("solve", "solve one instance and write a Solution JSON");
  add_input_flags(solve, m);
  solve->add_option("--k", m.k, "cardinality bound")->required()->expected(1);
  solve->add_option("--tau", m.tau, "risk-return trade-off");
  solve->add_option("--solver", m.solver)->check(CLI::IsMember(solver_names));
  solve->add_option("--out", m.out, "output path (default stdout)");
  solve->add_option("--emit", m.emit, "json: Solution, csv: outer trace")
      ->check(CLI::IsMember({"json", "csv"}));
  add_solver_flags(solve, m);

  auto* backtest = app.add_subcommand("backtest", "rolling-horizon backtest over a returns CSV");
  backtest->add_option("--returns", m.returns_path)->required()->check(CLI::ExistingFile);
  backtest->add_option("--k", m.k, "cardinality bound")->required()->expected(1);
  backtest->add_option("--tau", m.tau);
  backtest->add_option("--window", m.window, "estimation window length in periods");
  backtest->add_option("--solver", m.solver)->check(CLI::IsMember(solver_names));
  backtest->add_option("--out", m.out);
  backtest->add_option("--emit", m.emit, "json: report, csv: weights per window")
      ->check(CLI::IsMember({"json", "csv"}));
  add_solver_flags(backtest, m);

  auto* compare = app.add_subcommand("compare", "return, risk, Sharpe and gap table per (solver, k)");
  add_input_flags(compare, m);
  compare->add_option("--k", m.k, "one or more cardinality bounds")->required();
  compare->add_option("--tau", m.tau);
  compare->add_option("--solver", m.solvers, "solvers to compare")
      ->check(CLI::IsMember(solver_names));
  compare->add_option("--reference", m.reference, "gap reference")
      ->check(CLI::IsMember({"mosek-file", "oracle", "pd"}));
  compare->add_option("--reference-file", m.reference_file, "external Solution JSON")
      ->check(CLI::ExistingFile);
  compare->add_option("--out", m.out);
  compare->add_option("--emit", m.emit)->check(CLI::IsMember({"json", "csv"}));
  add_solver_flags(compare, m);

  auto* bench = app.add_subcommand("bench", "timing sweep on seeded synthetic instances");
  bench->add_option("--sizes", m.sizes, "asset counts n");
  bench->add_option("--k", m.k, "cardinality bounds")->required();
  bench->add_option("--tau", m.tau);
  bench->add_option("--solver", m.solvers, "solvers to time")->check(CLI::IsMember(solver_names));
  bench->add_option("--seed", m.seed);
  bench->add_option("--jobs", m.jobs, "cells timed concurrently")->check(CLI::PositiveNumber);
  bench->add_option("--out", m.out);
  add_solver_flags(bench, m);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }
  if (bench->parsed() && bench->count("--solver") == 0) m.solvers = {"pd", "padm"};

  try {
    m.cfg.validate();
    if (solve->parsed()) return cmd_solve(m, solve->count("--tau") > 0);
    if (backtest->parsed()) return cmd_backtest(m);
    if (compare->parsed()) return cmd_compare(m, compare->count("--tau") > 0);
    return cmd_bench(m);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInputError;
  }
}
