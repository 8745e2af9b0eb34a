#include <gtest/gtest.h>

#include <cmath>

#include "ccmv/model.hpp"
#include "test_support.hpp"

using namespace ccmv;
using ccmv::testing::random_psd;

namespace {

ReturnsMatrix make_returns(const Matrix& values) {
  ReturnsMatrix r;
  r.values = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) r.tickers.push_back("T" + std::to_string(j));
  return r;
}

ProblemSpec identity_spec(int n, double tau, int k) {
  ProblemSpec s;
  s.A = Matrix::Identity(n, n);
  s.mu = Vector::Zero(n);
  s.tau = tau;
  s.k = k;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an ccmv::Error";
  return ErrorCode::ParseError;
}

}  // namespace

TEST(EstimateMoments, TwoPeriodsOneAsset) {
  Matrix v(2, 1);
  v << 0.1, 0.3;
  const MomentEstimate m = estimate_moments(make_returns(v));
  EXPECT_NEAR(m.mu(0), 0.2, 1e-15);
  // ((0.1-0.2)^2 + (0.3-0.2)^2) / (2-1)
  EXPECT_NEAR(m.A(0, 0), 0.02, 1e-15);
}

TEST(EstimateMoments, ConstantColumnHasZeroVariance) {
  Matrix v(3, 1);
  v << 0.1, 0.1, 0.1;
  EXPECT_NEAR(estimate_moments(make_returns(v)).A(0, 0), 0.0, 1e-30);
}

TEST(EstimateMoments, DuplicatedAssetsGiveRankOne) {
  Matrix v(4, 2);
  v << 0.1, 0.1, -0.2, -0.2, 0.05, 0.05, 0.3, 0.3;
  const Matrix A = estimate_moments(make_returns(v)).A;
  EXPECT_EQ(A(0, 1), A(0, 0));
  EXPECT_EQ(A(1, 0), A(1, 1));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  EXPECT_NEAR(eig.eigenvalues()(0), 0.0, 1e-15);
}

TEST(EstimateMoments, Errors) {
  Matrix one(1, 2);
  one << 0.1, 0.2;
  EXPECT_EQ(code_of([&] { estimate_moments(make_returns(one)); }), ErrorCode::InsufficientData);
  Matrix bad(2, 1);
  bad << 0.1, std::nan("");
  EXPECT_EQ(code_of([&] { estimate_moments(make_returns(bad)); }), ErrorCode::BadData);
}

TEST(EstimateMoments, CovarianceIsPsdOnRandomDirections) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 3 + trial % 7, n = 2 + trial % 9;  // often T < n: singular
    Matrix v(T, n);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < n; ++j) v(t, j) = 0.05 * normal(rng);
    const Matrix A = estimate_moments(make_returns(v)).A;
    EXPECT_EQ((A - A.transpose()).cwiseAbs().maxCoeff(), 0.0);
    for (int d = 0; d < 100; ++d) {
      Vector z(n);
      for (int j = 0; j < n; ++j) z(j) = normal(rng);
      EXPECT_GE(z.dot(A * z), -1e-10 * z.squaredNorm());
    }
  }
}

TEST(ValidateProblem, AcceptsIdentity) { EXPECT_NO_THROW(validate_problem(identity_spec(3, 0.5, 1))); }

TEST(ValidateProblem, NamesViolatedInvariant) {
  ProblemSpec s = identity_spec(2, 0.5, 1);
  s.A(1, 1) = -0.1;
  EXPECT_EQ(code_of([&] { validate_problem(s); }), ErrorCode::NotPSD);

  s = identity_spec(3, 0.5, 4);
  EXPECT_EQ(code_of([&] { validate_problem(s); }), ErrorCode::BadK);
  s.k = 0;
  EXPECT_EQ(code_of([&] { validate_problem(s); }), ErrorCode::BadK);

  s = identity_spec(3, 0.0, 1);
  EXPECT_EQ(code_of([&] { validate_problem(s); }), ErrorCode::BadTau);

  s = identity_spec(2, 0.5, 1);
  s.A(0, 1) = 0.3;
  EXPECT_EQ(code_of([&] { validate_problem(s); }), ErrorCode::AsymmetricA);

  s = identity_spec(2, 0.5, 1);
  s.mu = Vector::Zero(3);
  EXPECT_EQ(code_of([&] { validate_problem(s); }), ErrorCode::BadDimension);
}

TEST(ValidateProblem, AdmitsRoundOffNegativeEigenvalues) {
  // Rank-deficient sample covariances have eigenvalues at -1e-17 scale.
  std::mt19937_64 rng(3);
  ProblemSpec s = identity_spec(8, 0.5, 2);
  s.A = random_psd(rng, 8, 2);
  EXPECT_NO_THROW(validate_problem(s));
}

TEST(MaxEigenvalue, KnownSpectra) {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1.0, 3.0;
  EXPECT_NEAR(max_eigenvalue(d, 1e-10), 3.0, 3e-10);
  for (int n : {1, 4, 17}) EXPECT_NEAR(max_eigenvalue(Matrix::Identity(n, n)), 1.0, 1e-10);

  Vector v(3);
  v << 1.0, -2.0, std::sqrt(2.0);  // ||v||^2 = 7
  EXPECT_NEAR(max_eigenvalue(v * v.transpose(), 1e-10), 7.0, 7e-10);
  EXPECT_EQ(max_eigenvalue(Matrix::Zero(3, 3)), 0.0);
}

TEST(MaxEigenvalue, RestartsWhenOnesIsInNullSpace) {
  Vector v(2);
  v << 1.0, -1.0;  // orthogonal to the all-ones start
  EXPECT_NEAR(max_eigenvalue(v * v.transpose(), 1e-10), 2.0, 2e-10);
}

TEST(MaxEigenvalue, MatchesDenseSolverAndBoundsRayleighQuotients) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial;
    const Matrix A = random_psd(rng, n, 1 + trial % (n + 1));
    const double tol = 1e-9;
    const double lhat = max_eigenvalue(A, tol);
    const double exact = Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues().maxCoeff();
    EXPECT_LE(std::abs(lhat - exact), 10 * tol * exact) << "n=" << n;
    for (int d = 0; d < 100; ++d) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x(i) = normal(rng);
      EXPECT_GE(lhat * (1 + 10 * tol), x.dot(A * x) / x.squaredNorm());
    }
  }
}

TEST(MaxEigenvalue, ReportsNonConvergence) {
  // Two nearly equal top eigenvalues and a 3-step cap.
  Matrix A = Matrix::Zero(3, 3);
  A.diagonal() << 1.0, 0.999, 0.1;
  EXPECT_EQ(code_of([&] { max_eigenvalue(A, 1e-14, 3); }), ErrorCode::EigenFailed);
}

TEST(FeasiblePoint, TopKByMu) {
  ProblemSpec s = identity_spec(5, 0.5, 2);
  s.mu << 0.3, 0.1, 0.2, 0.05, 0.0;
  Vector expected(5);
  expected << 0.5, 0.0, 0.5, 0.0, 0.0;
  EXPECT_EQ(make_feasible_point(s), expected);

  s.k = 5;
  EXPECT_TRUE(make_feasible_point(s).isApprox(Vector::Constant(5, 0.2)));

  s = identity_spec(4, 0.5, 1);
  s.mu.setConstant(0.1);
  EXPECT_EQ(make_feasible_point(s), Vector::Unit(4, 0));
}

TEST(FeasiblePoint, AlwaysFeasible) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 25;
    const int k = 1 + static_cast<int>(rng() % n);
    ProblemSpec s = ccmv::testing::random_problem(rng, n, k);
    EXPECT_TRUE(is_feasible(make_feasible_point(s), k));
  }
}

TEST(Objective, HandValues) {
  ProblemSpec s = identity_spec(3, 1.0, 1);
  s.mu << 0.3, 0.2, 0.1;
  EXPECT_NEAR(objective_f(s, Vector::Unit(3, 0)), 0.7, 1e-15);
  EXPECT_EQ(objective_f(s, Vector::Zero(3)), 0.0);

  ProblemSpec t = identity_spec(2, 0.0, 1);
  EXPECT_NEAR(objective_f(t, Vector::Constant(2, 0.5)), 0.5, 1e-15);
  EXPECT_EQ(code_of([&] { objective_f(t, Vector::Zero(3)); }), ErrorCode::BadDimension);
}

TEST(PenaltyQ, HandValuesAndLinearityInRho) {
  ProblemSpec s;
  s.A = Matrix::Zero(2, 2);
  s.mu = Vector::Zero(2);
  s.tau = 0.0;
  EXPECT_EQ(penalty_q(s, 2.0, Vector::Unit(2, 0), Vector::Zero(2)), 2.0);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    ProblemSpec r = ccmv::testing::random_problem(rng, 6, 2);
    const Vector x = Vector::Random(6), y = Vector::Random(6);
    EXPECT_EQ(penalty_q(r, 3.0, x, x), objective_f(r, x));
    const double dist = (x - y).squaredNorm();
    EXPECT_NEAR(penalty_q(r, 6.0, x, y) - penalty_q(r, 3.0, x, y), 3.0 * dist,
                1e-12 * (1 + dist));
  }
}

TEST(SolverConfig, RejectsBadValues) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.zeta = 1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadConfig);
  c = {};
  c.eps_inner = 0.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadConfig);
  c = {};
  c.max_outer = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadConfig);
}
