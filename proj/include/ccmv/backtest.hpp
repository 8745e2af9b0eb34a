#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccmv/model.hpp"

namespace ccmv {

enum class SolverKind { Pd, Padm, Oracle };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& text);

/// Dispatches to the selected solver.
Solution solve_with(SolverKind kind, const ProblemSpec& spec, const SolverConfig& cfg,
                    Exec exec = Exec::Serial);

struct InSampleStats {
  double ret = 0.0;
  double risk = 0.0;                ///< variance x'Ax
  std::optional<double> sharpe;     ///< ret / sqrt(risk); empty when risk is 0 and ret is not
};

/// Return mu'x, risk x'Ax and Sharpe ratio mu'x / sqrt(x'Ax).
InSampleStats in_sample_stats(const ProblemSpec& spec, const Vector& x);

/// |g - g_ref| / (|g_ref| + 1).
double gap(double g, double g_ref);

struct OosStatistics {
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  std::optional<double> sharpe_hat;  ///< empty when sigma_hat is 0
};

/// Mean and standard deviation (denominator m - 1) of m realized returns by the
/// two-pass formula. Throws SigmaUndefined when m < 2.
OosStatistics oos_statistics(const std::vector<double>& realized);

struct BacktestConfig {
  int window = 48;
  SolverKind solver = SolverKind::Pd;
  SolverConfig solver_cfg;
  double tau = 0.5;
  int k = 10;
};

struct BacktestReport {
  std::vector<int> rebalance_rows;    ///< row t whose window [t - window, t) produced x_t
  std::vector<Vector> weights_by_window;
  std::vector<double> oos_returns;    ///< x_t' r_t, the return of the following period
  std::vector<bool> window_flagged;   ///< solver failed or hit an iteration cap
  std::vector<std::string> window_notes;
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  std::optional<double> sharpe_hat;
  InSampleStats in_sample;            ///< of the final window
  std::vector<std::string> tickers;
};

/// Produces weights from the moment estimate of one window.
using WeightPolicy = std::function<Solution(const ProblemSpec&)>;

/// Sliding-window backtest: for t = window .. T-1 (0-based rows), estimate
/// moments on rows [t - window, t), obtain x_t and realize x_t' r_t. A window
/// whose policy throws keeps the previous weights (the feasible point for the
/// first window) and is flagged. Windows run concurrently under Exec::Parallel;
/// the report is identical to the serial one.
BacktestReport rolling_horizon(const ReturnsMatrix& returns, int window, double tau, int k,
                               const WeightPolicy& policy, Exec exec = Exec::Serial);

BacktestReport rolling_horizon(const ReturnsMatrix& returns, const BacktestConfig& cfg,
                               Exec exec = Exec::Serial);

}  // namespace ccmv
