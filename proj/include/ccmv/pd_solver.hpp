#pragma once

#include <Eigen/Cholesky>

#include <vector>

#include "ccmv/model.hpp"

namespace ccmv {

/// Cached pieces of the closed-form x-step at a fixed penalty rho:
/// the Cholesky factor of A + rho I, s = (A + rho I)^{-1} e,
/// t = (A + rho I)^{-1} tau mu and e's.
struct PenaltyFactorization {
  double rho = 0.0;
  Eigen::LLT<Matrix> chol;
  Vector s;
  Vector t;
  double ets = 0.0;
};

PenaltyFactorization build_factorization(const ProblemSpec& spec, double rho);

/// Unique minimizer of q_rho(., y) over the hyperplane e'x = 1. One pair of
/// triangular solves on top of the cached factorization.
Vector x_step(const PenaltyFactorization& fact, const ProblemSpec& spec, const Vector& y);

/// Projection onto {y >= 0, ||y||_0 <= k}: clamp negatives, then keep the k
/// largest entries (ties go to the lower index) using selection, not a sort.
Vector y_step(const Vector& x, int k);

struct BcdResult {
  Vector x;
  Vector y;
  int iterations = 0;
  std::vector<double> q_trace;  ///< q_rho(x_l, y_l), l = 1..iterations
  bool capped = false;          ///< max_inner reached before the stopping rule
};

/// Alternating exact minimization over x and y at a fixed rho. Stops when the
/// larger of the relative infinity-norm changes of x and y drops to eps_inner.
/// Throws MonotonicityViolation if q ever rises by more than 1e-9 (1 + |q|).
BcdResult bcd_inner(const ProblemSpec& spec, const PenaltyFactorization& fact, const Vector& y0,
                    const SolverConfig& cfg);
BcdResult bcd_inner(const ProblemSpec& spec, double rho, const Vector& y0,
                    const SolverConfig& cfg);

/// Upper bound used by the warm-start safeguard:
/// max{f(x_feas), min_x q_rho0(x, y0)} + slack.
double compute_upsilon(const ProblemSpec& spec, const PenaltyFactorization& first,
                       const Vector& x_feas, const Vector& y0, double slack);

/// Starting penalty: cfg.rho0, raised to lambda_max(A) + 1 when smaller.
double resolve_rho0(const ProblemSpec& spec, const SolverConfig& cfg, bool* raised = nullptr);

/// Penalty decomposition for the cardinality-constrained mean-variance
/// problem. The reported weights come from polish_support on the final y
/// support and carry a KKT certificate.
Solution ccmv_pd_solve(const ProblemSpec& spec, const SolverConfig& cfg = {});

struct PolishResult {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  bool fallback = false;  ///< active-set cycling cap hit, projected gradient used
};

/// Exact minimizer of f over {e'x = 1, x >= 0, x_i = 0 off support} by a
/// primal active-set method on the reduced space. Handles singular A.
PolishResult polish_support(const ProblemSpec& spec, const Support& support);

/// First-order certificate of x on support L. Throws BadSupport for an empty
/// support or nonzero weight off the support.
KktCertificate kkt_check(const ProblemSpec& spec, const Vector& x, const Support& support);

/// Euclidean projection onto the probability simplex (sort-based).
Vector project_simplex(const Vector& v);

}  // namespace ccmv
