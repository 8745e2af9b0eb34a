#include <gtest/gtest.h>

#include "ccmv/oracle.hpp"
#include "test_support.hpp"

using namespace ccmv;
using namespace ccmv::testing;

namespace {

ProblemSpec diag_spec(const Vector& d, double tau, int k) {
  ProblemSpec s;
  s.A = d.asDiagonal();
  s.mu = Vector::Zero(d.size());
  s.tau = tau;
  s.k = k;
  return s;
}

}  // namespace

TEST(RestrictedQp, IdentityPair) {
  const ProblemSpec s = diag_spec(Vector::Ones(2), 0.0, 2);
  const RestrictedSolve r = restricted_qp_solve(s, {0, 1});
  EXPECT_NEAR(r.x(0), 0.5, 1e-14);
  EXPECT_NEAR(r.x(1), 0.5, 1e-14);
  EXPECT_NEAR(r.objective, 0.5, 1e-14);
}

TEST(RestrictedQp, Singleton) {
  const ProblemSpec s = diag_spec(Vector::Ones(4), 0.5, 1);
  const RestrictedSolve r = restricted_qp_solve(s, {2});
  EXPECT_EQ(r.x, Vector::Unit(4, 2));
  EXPECT_NEAR(r.objective, 1.0, 1e-15);
}

TEST(RestrictedQp, WeightedDiagonal) {
  Vector d(2);
  d << 1.0, 3.0;
  const RestrictedSolve r = restricted_qp_solve(diag_spec(d, 0.0, 2), {0, 1});
  EXPECT_NEAR(r.x(0), 0.75, 1e-14);
  EXPECT_NEAR(r.x(1), 0.25, 1e-14);
  EXPECT_NEAR(r.objective, 0.75, 1e-14);
}

TEST(RestrictedQp, ActiveNonnegativity) {
  // mu pulls everything onto asset 0.
  ProblemSpec s = diag_spec(Vector::Constant(2, 0.01), 1.0, 2);
  s.mu << 1.0, 0.0;
  const RestrictedSolve r = restricted_qp_solve(s, {0, 1});
  EXPECT_EQ(r.x(1), 0.0);
  EXPECT_NEAR(r.x(0), 1.0, 1e-14);
}

TEST(RestrictedQp, TooLarge) {
  const ProblemSpec s = diag_spec(Vector::Ones(21), 0.5, 21);
  Support all(21);
  for (int i = 0; i < 21; ++i) all[i] = i;
  try {
    restricted_qp_solve(s, all);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(BruteForce, ThreeAssetExample) {
  ProblemSpec s = diag_spec(Vector::Ones(3), 1.0, 1);
  s.mu << 0.3, 0.2, 0.1;
  const OracleResult r = brute_force_solve(s);
  EXPECT_EQ(r.x, Vector::Unit(3, 0));
  EXPECT_NEAR(r.objective, 0.7, 1e-15);
  EXPECT_EQ(r.supports_examined, 3);
}

TEST(BruteForce, NoRandomFeasiblePointBeatsIt) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const int k = 1 + trial % 3;
    const ProblemSpec s = random_problem(rng, n, k);
    const OracleResult r = brute_force_solve(s);
    EXPECT_TRUE(is_feasible(r.x, k));
    for (int sample = 0; sample < 1000; ++sample) {
      const Vector x = random_feasible_point(rng, n, 1 + static_cast<int>(rng() % k));
      EXPECT_GE(objective_f(s, x), r.objective - 1e-10);
    }
  }
}

TEST(BruteForce, ObjectiveIsMonotoneInK) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + trial % 5;
    ProblemSpec s = random_problem(rng, n, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n; ++k) {
      s.k = k;
      const double f = brute_force_solve(s).objective;
      EXPECT_LE(f, prev + 1e-10);
      prev = f;
    }
  }
}

TEST(BruteForce, BudgetAndBinomial) {
  EXPECT_EQ(binomial(5, 2), 10);
  EXPECT_EQ(binomial(476, 0), 1);
  EXPECT_EQ(binomial(3, 4), 0);
  EXPECT_EQ(binomial(1000, 500), std::numeric_limits<std::int64_t>::max());
  const ProblemSpec s = diag_spec(Vector::Ones(30), 0.5, 10);
  try {
    brute_force_solve(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(BruteForce, OracleSolutionIsCertified) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const ProblemSpec s = random_problem(rng, 6, 2);
    const Solution sol = oracle_solution(s, brute_force_solve(s));
    EXPECT_EQ(sol.solver, "oracle");
    EXPECT_EQ(sol.status, SolveStatus::Converged);
    EXPECT_TRUE(cardinality_guarantee(sol, 2));
    EXPECT_LE(sol.kkt_residual, 1e-8);
  }
}
