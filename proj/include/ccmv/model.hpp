#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "ccmv/error.hpp"
#include "ccmv/exec.hpp"

namespace ccmv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted list of asset indices (0-based).
using Support = std::vector<int>;

/// T x n per-period simple returns.
struct ReturnsMatrix {
  Matrix values;
  std::vector<std::string> tickers;
  std::vector<std::string> dates;
  std::string period_label = "monthly";

  int periods() const { return static_cast<int>(values.rows()); }
  int assets() const { return static_cast<int>(values.cols()); }

  /// Throws InsufficientData (T < 2), BadData (n < 1, non-finite entry) or
  /// BadDimension (ticker count does not match n).
  void validate() const;

  /// Rows [first, first + count) as a new matrix sharing the tickers.
  ReturnsMatrix slice_rows(int first, int count) const;
};

/// One instance of  min x'Ax - tau mu'x  s.t.  e'x = 1, x >= 0, ||x||_0 <= k.
struct ProblemSpec {
  Matrix A;
  Vector mu;
  double tau = 0.5;
  int k = 1;

  int n() const { return static_cast<int>(mu.size()); }
};

struct SolverConfig {
  double rho0 = 0.1;  ///< raised to lambda_max(A) + 1 by the solvers when smaller
  double zeta = 10.0;
  double eps_inner = 1e-4;
  double eps_outer = 1e-4;
  int max_inner = 1000;
  int max_outer = 50;
  double upsilon_slack = 0.0;

  /// Throws BadConfig naming the first violated invariant.
  void validate() const;
};

struct MomentEstimate {
  Vector mu;
  Matrix A;
};

/// First-order certificate for a candidate portfolio restricted to a support.
/// The off-support multiplier is free and is eliminated rather than stored.
struct KktCertificate {
  double beta = 0.0;
  Vector lambda;  ///< nonnegativity multipliers, zero on strictly positive weights
  Support support;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double dual_feasibility_violation = 0.0;

  double max_residual() const {
    return std::max({stationarity_residual, complementarity_residual, dual_feasibility_violation});
  }
};

enum class SolveStatus { Converged, MaxIterations };

std::string to_string(SolveStatus status);
SolveStatus solve_status_from_string(const std::string& text);

/// One record per outer (penalty) iteration.
struct OuterRecord {
  double rho = 0.0;
  int inner_iterations = 0;
  double q_value = 0.0;
  double infeasibility = 0.0;  ///< ||x - y||_inf for the PD solver, ||x - y||_1 for PADM
  bool inner_capped = false;
  bool safeguard_reset = false;
};

struct Solution {
  std::string solver = "pd";
  Vector weights;
  Support support;  ///< indices with nonzero weight
  double objective = 0.0;
  double kkt_residual = 0.0;
  KktCertificate kkt;
  std::vector<OuterRecord> trace;
  SolveStatus status = SolveStatus::Converged;

  double rho0 = 0.0;           ///< penalty actually used in the first outer iteration
  bool rho0_raised = false;    ///< true when the configured rho0 was below lambda_max(A) + 1
  double upsilon = 0.0;
  int safeguard_resets = 0;
  bool polish_fallback = false;
};

// ---------------------------------------------------------------------------
// Portfolio model operations

/// Column means and the unbiased sample covariance (denominator T-1).
MomentEstimate estimate_moments(const ReturnsMatrix& returns, Exec exec = Exec::Serial);

/// Throws AsymmetricA, NotPSD, BadTau, BadK or BadDimension.
void validate_problem(const ProblemSpec& spec);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration started
/// from the all-ones vector; restarts from a seeded random vector if the
/// iterate collapses. Throws EigenFailed when the iteration cap is hit.
double max_eigenvalue(const Matrix& A, double tol = 1e-10, int max_iterations = 100000);

/// Equal weights 1/k on the k assets of largest mu (ties to the lower index).
Vector make_feasible_point(const ProblemSpec& spec);

/// x'Ax - tau mu'x.
double objective_f(const ProblemSpec& spec, const Vector& x);

/// f(x) + rho ||x - y||_2^2.
double penalty_q(const ProblemSpec& spec, double rho, const Vector& x, const Vector& y);

/// Exact feasibility for the cardinality-constrained problem.
bool is_feasible(const Vector& x, int k, double sum_tol = 1e-8);

/// Indices of nonzero entries, ascending.
Support support_of(const Vector& x);

}  // namespace ccmv
