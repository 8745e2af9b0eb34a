#pragma once

#include <vector>

#include "ccmv/model.hpp"

namespace ccmv {

/// argmin_x 1/2 ||x - v||^2 + c ||x - y||_1  over the probability simplex.
/// Exact: the multiplier of e'x = 1 is located among the sorted breakpoints
/// of the piecewise-linear map theta -> sum_i x_i(theta). With c = 0 this is
/// the Euclidean simplex projection.
Vector prox_l1_simplex(const Vector& v, const Vector& y, double c);

struct PadmXStepResult {
  Vector x;
  int iterations = 0;
  bool converged = false;  ///< false: NotConverged, best iterate returned
};

struct PadmXStepOptions {
  double tol = 1e-9;            ///< target objective accuracy
  int max_iterations = 0;       ///< 0 selects max(10 n, 500)
  const Vector* warm = nullptr; ///< starting point, uniform when null
  double lambda_max = -1.0;     ///< lambda_max(A) when already known
};

/// Approximately solves  min x'Ax - tau mu'x + rho ||x - y||_1  over the
/// simplex by proximal gradient with fixed step 1 / (2 lambda_max(A)).
/// Iterates stay on the simplex and the objective never increases.
PadmXStepResult padm_x_step(const ProblemSpec& spec, double rho, const Vector& y,
                            const PadmXStepOptions& opts = {});

/// l1 distance to {e'y = 1, ||y||_0 <= k} restricted to support S:
/// sum_{i not in S} |x_i| + |1 - sum_{i in S} x_i|.
double padm_support_cost(const Vector& x, const Support& support);

struct PadmYStepResult {
  Vector y;
  Support support;
  double cost = 0.0;
};

/// Minimizes ||x - y||_1 over {e'y = 1, ||y||_0 <= k}. Supports are
/// enumerated exhaustively for n <= 20; otherwise top-k by |x| followed by
/// best-improvement single swaps. y copies x on the support and the deficit
/// goes to the largest-|x| support entry (ties to the lower index).
PadmYStepResult padm_y_step(const Vector& x, int k);

/// Support of the top-k entries by |x| (ties to the lower index), ascending.
Support top_k_by_magnitude(const Vector& x, int k);

/// f(x) + rho ||x - y||_1.
double padm_phi(const ProblemSpec& spec, double rho, const Vector& x, const Vector& y);

struct PadmInnerResult {
  Vector x;
  Vector y;
  int iterations = 0;
  std::vector<double> phi_trace;
  bool capped = false;
};

/// Alternating padm_x_step / padm_y_step at fixed rho under the same relative
/// change stopping rule as the PD inner loop.
PadmInnerResult padm_inner(const ProblemSpec& spec, double rho, double lambda_max,
                           const Vector& x0, const Vector& y0, const SolverConfig& cfg);

/// l1 penalty alternating direction baseline with the same outer penalty
/// schedule as the PD solver; the result is polished and certified the same way.
Solution ccmv_padm_solve(const ProblemSpec& spec, const SolverConfig& cfg = {});

}  // namespace ccmv
