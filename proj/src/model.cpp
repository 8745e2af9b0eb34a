#include "ccmv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ccmv/kernels.hpp"

namespace ccmv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::BadData: return "BadData";
    case ErrorCode::AsymmetricA: return "AsymmetricA";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::BadTau: return "BadTau";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::EigenFailed: return "EigenFailed";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::BadSupport: return "BadSupport";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::SigmaUndefined: return "SigmaUndefined";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string to_string(SolveStatus status) {
  return status == SolveStatus::Converged ? "Converged" : "MaxIterations";
}

SolveStatus solve_status_from_string(const std::string& text) {
  if (text == "Converged") return SolveStatus::Converged;
  if (text == "MaxIterations") return SolveStatus::MaxIterations;
  throw Error(ErrorCode::ParseError, "unknown status '" + text + "'");
}

void ReturnsMatrix::validate() const {
  if (values.rows() < 2)
    throw Error(ErrorCode::InsufficientData,
                "need at least 2 periods, got " + std::to_string(values.rows()));
  if (values.cols() < 1) throw Error(ErrorCode::BadData, "no assets");
  if (!tickers.empty() && static_cast<Eigen::Index>(tickers.size()) != values.cols())
    throw Error(ErrorCode::BadDimension, "ticker count does not match asset count");
  for (Eigen::Index t = 0; t < values.rows(); ++t)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      if (!std::isfinite(values(t, j)))
        throw Error(ErrorCode::BadData, "non-finite return at row " + std::to_string(t) +
                                            ", column " + std::to_string(j));
}

ReturnsMatrix ReturnsMatrix::slice_rows(int first, int count) const {
  ReturnsMatrix out;
  out.values = values.middleRows(first, count);
  out.tickers = tickers;
  if (!dates.empty())
    out.dates.assign(dates.begin() + first, dates.begin() + first + count);
  out.period_label = period_label;
  return out;
}

void SolverConfig::validate() const {
  if (!(rho0 > 0.0)) throw Error(ErrorCode::BadConfig, "rho0 must be positive");
  if (!(zeta > 1.0)) throw Error(ErrorCode::BadConfig, "zeta must exceed 1");
  if (!(eps_inner > 0.0)) throw Error(ErrorCode::BadConfig, "eps_inner must be positive");
  if (!(eps_outer > 0.0)) throw Error(ErrorCode::BadConfig, "eps_outer must be positive");
  if (max_inner < 1) throw Error(ErrorCode::BadConfig, "max_inner must be at least 1");
  if (max_outer < 1) throw Error(ErrorCode::BadConfig, "max_outer must be at least 1");
  if (!(upsilon_slack >= 0.0)) throw Error(ErrorCode::BadConfig, "upsilon_slack must be >= 0");
}

MomentEstimate estimate_moments(const ReturnsMatrix& returns, Exec exec) {
  returns.validate();
  MomentEstimate m;
  m.mu = kernels::column_means(returns.values);
  m.A = kernels::sample_covariance(returns.values, m.mu, exec);
  return m;
}

void validate_problem(const ProblemSpec& spec) {
  const Eigen::Index n = spec.mu.size();
  if (n < 1) throw Error(ErrorCode::BadDimension, "empty problem");
  if (spec.A.rows() != n || spec.A.cols() != n)
    throw Error(ErrorCode::BadDimension, "A must be " + std::to_string(n) + "x" +
                                             std::to_string(n));
  if (!spec.A.allFinite() || !spec.mu.allFinite())
    throw Error(ErrorCode::BadData, "non-finite entry in A or mu");
  if (!(spec.tau > 0.0) || !std::isfinite(spec.tau))
    throw Error(ErrorCode::BadTau, "tau must be positive and finite");
  if (spec.k < 1 || spec.k > n)
    throw Error(ErrorCode::BadK, "k must lie in [1, " + std::to_string(n) + "], got " +
                                     std::to_string(spec.k));

  const double scale = std::max(spec.A.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (spec.A - spec.A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw Error(ErrorCode::AsymmetricA, "A is not symmetric (max |A - A'| = " +
                                            std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.A, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (lmin < -1e-10 * std::max(lmax, 0.0))
    throw Error(ErrorCode::NotPSD, "A has eigenvalue " + std::to_string(lmin));
}

double max_eigenvalue(const Matrix& A, double tol, int max_iterations) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) throw Error(ErrorCode::BadDimension, "A must be square");
  if (A.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;

  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  bool restarted = false;
  double lambda = 0.0;
  double prev_change = -1.0;

  for (int it = 0; it < max_iterations; ++it) {
    Vector w = A * v;
    const double norm = w.norm();
    if (norm <= 1e-14 * A.norm()) {
      // Start vector lies (numerically) in the null space.
      if (restarted) return 0.0;
      restarted = true;
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
      v.normalize();
      prev_change = -1.0;
      continue;
    }
    const double next = v.dot(w);
    const double change = std::abs(next - lambda);
    lambda = next;
    v = w / norm;

    if (it > 0 && change <= tol * std::abs(lambda)) {
      // Geometric tail estimate of the remaining error.
      const double rate = prev_change > 0.0 ? std::min(change / prev_change, 0.999999) : 0.0;
      if (change * rate / (1.0 - rate) <= tol * std::abs(lambda)) return lambda;
    }
    prev_change = change;
  }
  throw Error(ErrorCode::EigenFailed,
              "power iteration did not converge in " + std::to_string(max_iterations) + " steps");
}

Vector make_feasible_point(const ProblemSpec& spec) {
  const int n = spec.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return spec.mu(a) > spec.mu(b); });
  Vector x = Vector::Zero(n);
  for (int i = 0; i < spec.k; ++i) x(order[i]) = 1.0 / spec.k;
  return x;
}

double objective_f(const ProblemSpec& spec, const Vector& x) {
  if (x.size() != spec.mu.size() || spec.A.rows() != x.size())
    throw Error(ErrorCode::BadDimension, "x has " + std::to_string(x.size()) +
                                             " entries, problem has " +
                                             std::to_string(spec.mu.size()));
  return x.dot(spec.A * x) - spec.tau * spec.mu.dot(x);
}

double penalty_q(const ProblemSpec& spec, double rho, const Vector& x, const Vector& y) {
  if (y.size() != x.size()) throw Error(ErrorCode::BadDimension, "x and y differ in length");
  return objective_f(spec, x) + rho * (x - y).squaredNorm();
}

bool is_feasible(const Vector& x, int k, double sum_tol) {
  if (std::abs(x.sum() - 1.0) > sum_tol) return false;
  int nnz = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < 0.0) return false;
    if (x(i) != 0.0) ++nnz;
  }
  return nnz <= k;
}

Support support_of(const Vector& x) {
  Support s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) != 0.0) s.push_back(static_cast<int>(i));
  return s;
}

}  // namespace ccmv
