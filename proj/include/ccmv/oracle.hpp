#pragma once

#include <cstdint>

#include "ccmv/model.hpp"

namespace ccmv {

struct RestrictedSolve {
  Vector x;
  double objective = 0.0;
  int patterns_skipped = 0;  ///< singular KKT systems
};

/// Global minimizer of f over {e'x = 1, x >= 0, x_i = 0 off S}, found by
/// solving the equality-constrained KKT system of every nonempty zero
/// pattern inside S and keeping the best candidate that is primal feasible
/// with nonnegative multipliers. Throws TooLarge for |S| > 20.
RestrictedSolve restricted_qp_solve(const ProblemSpec& spec, const Support& support);

struct OracleResult {
  Vector x;
  Support support;
  double objective = 0.0;
  std::int64_t supports_examined = 0;
};

/// Number of k-subsets of n items, saturating at INT64_MAX.
std::int64_t binomial(int n, int k);

inline constexpr std::int64_t kOracleBudget = 1'000'000;

/// Exhaustive global solver: restricted_qp_solve over every support of size
/// exactly k. Ties resolve to the lexicographically smallest support on both
/// execution paths. Throws TooLarge when C(n, k) exceeds the budget.
OracleResult brute_force_solve(const ProblemSpec& spec, Exec exec = Exec::Serial,
                               std::int64_t budget = kOracleBudget);

/// Wraps an oracle result in the common Solution record (status Converged,
/// KKT certificate on the nonzero support).
Solution oracle_solution(const ProblemSpec& spec, const OracleResult& result);

}  // namespace ccmv
