#include "ccmv/backtest.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "ccmv/oracle.hpp"
#include "ccmv/padm.hpp"
#include "ccmv/pd_solver.hpp"

namespace ccmv {

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Pd: return "pd";
    case SolverKind::Padm: return "padm";
    case SolverKind::Oracle: return "oracle";
  }
  return "pd";
}

SolverKind solver_kind_from_string(const std::string& text) {
  if (text == "pd") return SolverKind::Pd;
  if (text == "padm") return SolverKind::Padm;
  if (text == "oracle") return SolverKind::Oracle;
  throw Error(ErrorCode::BadConfig, "unknown solver '" + text + "'");
}

Solution solve_with(SolverKind kind, const ProblemSpec& spec, const SolverConfig& cfg, Exec exec) {
  switch (kind) {
    case SolverKind::Pd: return ccmv_pd_solve(spec, cfg);
    case SolverKind::Padm: return ccmv_padm_solve(spec, cfg);
    case SolverKind::Oracle:
      validate_problem(spec);
      return oracle_solution(spec, brute_force_solve(spec, exec));
  }
  throw Error(ErrorCode::BadConfig, "unknown solver kind");
}

InSampleStats in_sample_stats(const ProblemSpec& spec, const Vector& x) {
  if (x.size() != spec.mu.size()) throw Error(ErrorCode::BadDimension, "x has wrong length");
  InSampleStats s;
  s.ret = spec.mu.dot(x);
  s.risk = x.dot(spec.A * x);
  if (s.ret == 0.0)
    s.sharpe = 0.0;
  else if (s.risk > 0.0)
    s.sharpe = s.ret / std::sqrt(s.risk);
  return s;
}

double gap(double g, double g_ref) { return std::abs(g - g_ref) / (std::abs(g_ref) + 1.0); }

OosStatistics oos_statistics(const std::vector<double>& realized) {
  const std::size_t m = realized.size();
  if (m < 2)
    throw Error(ErrorCode::SigmaUndefined,
                "need at least 2 out-of-sample returns, got " + std::to_string(m));
  OosStatistics s;
  double sum = 0.0;
  for (double r : realized) sum += r;
  s.mu_hat = sum / static_cast<double>(m);
  double ss = 0.0;
  for (double r : realized) ss += (r - s.mu_hat) * (r - s.mu_hat);
  s.sigma_hat = std::sqrt(ss / static_cast<double>(m - 1));
  if (s.sigma_hat > 0.0) s.sharpe_hat = s.mu_hat / s.sigma_hat;
  return s;
}

namespace {

struct WindowOutcome {
  Vector weights;
  ProblemSpec spec;
  bool failed = false;
  bool flagged = false;
  std::string note;
};

WindowOutcome run_window(const ReturnsMatrix& returns, int t, int window, double tau, int k,
                         const WeightPolicy& policy) {
  WindowOutcome w;
  try {
    const MomentEstimate m = estimate_moments(returns.slice_rows(t - window, window));
    w.spec.A = m.A;
    w.spec.mu = m.mu;
    w.spec.tau = tau;
    w.spec.k = k;
    const Solution sol = policy(w.spec);
    w.weights = sol.weights;
    if (sol.status != SolveStatus::Converged) {
      w.flagged = true;
      w.note = "solver hit its iteration cap";
    }
  } catch (const std::exception& e) {
    w.failed = true;
    w.flagged = true;
    w.note = e.what();
  }
  return w;
}

}  // namespace

BacktestReport rolling_horizon(const ReturnsMatrix& returns, int window, double tau, int k,
                               const WeightPolicy& policy, Exec exec) {
  returns.validate();
  const int T = returns.periods();
  if (window < 2 || window >= T)
    throw Error(ErrorCode::BadConfig, "window must satisfy 2 <= window < T (T = " +
                                          std::to_string(T) + ")");
  if (k < 1 || k > returns.assets()) throw Error(ErrorCode::BadK, "k out of range");

  const int count = T - window;
  std::vector<WindowOutcome> outcomes(count);
  if (exec == Exec::Serial) {
    for (int w = 0; w < count; ++w)
      outcomes[w] = run_window(returns, window + w, window, tau, k, policy);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int w = 0; w < count; ++w)
      outcomes[w] = run_window(returns, window + w, window, tau, k, policy);
  }

  BacktestReport rep;
  rep.tickers = returns.tickers;
  Vector carried;
  for (int w = 0; w < count; ++w) {
    const int t = window + w;
    WindowOutcome& o = outcomes[w];
    if (o.failed) {
      if (carried.size() == 0) {
        ProblemSpec fallback;
        fallback.mu = returns.values.middleRows(t - window, window).colwise().mean().transpose();
        fallback.k = k;
        carried = make_feasible_point(fallback);
      }
      o.weights = carried;
      spdlog::warn("backtest: window ending at row {} failed ({}); carrying weights forward", t,
                   o.note);
    }
    carried = o.weights;

    rep.rebalance_rows.push_back(t);
    rep.oos_returns.push_back(returns.values.row(t).dot(o.weights));
    rep.weights_by_window.push_back(o.weights);
    rep.window_flagged.push_back(o.flagged);
    rep.window_notes.push_back(o.note);
  }

  const OosStatistics oos = oos_statistics(rep.oos_returns);
  rep.mu_hat = oos.mu_hat;
  rep.sigma_hat = oos.sigma_hat;
  rep.sharpe_hat = oos.sharpe_hat;

  const WindowOutcome& last = outcomes.back();
  if (last.spec.mu.size() == returns.assets())
    rep.in_sample = in_sample_stats(last.spec, rep.weights_by_window.back());
  return rep;
}

BacktestReport rolling_horizon(const ReturnsMatrix& returns, const BacktestConfig& cfg,
                               Exec exec) {
  const SolverKind kind = cfg.solver;
  const SolverConfig solver_cfg = cfg.solver_cfg;
  // Each window is solved serially; parallelism lives at the window level.
  WeightPolicy policy = [kind, solver_cfg](const ProblemSpec& spec) {
    return solve_with(kind, spec, solver_cfg, Exec::Serial);
  };
  return rolling_horizon(returns, cfg.window, cfg.tau, cfg.k, policy, exec);
}

}  // namespace ccmv
