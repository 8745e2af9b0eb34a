#include "ccmv/pd_solver.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ccmv {

Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

namespace {

void check_support(const Support& support, Eigen::Index n) {
  if (support.empty()) throw Error(ErrorCode::BadSupport, "empty support");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= n)
      throw Error(ErrorCode::BadSupport, "support index out of range");
    if (i > 0 && support[i] <= support[i - 1])
      throw Error(ErrorCode::BadSupport, "support must be strictly increasing");
  }
}

// Restricted problem  min 1/2 z'Hz + c'z  s.t.  e'z = 1, z >= 0  with H = 2 A_LL.
struct Restricted {
  Matrix H;
  Vector c;
};

Vector projected_gradient(const Restricted& qp, Vector z, int steps) {
  const double lmax = max_eigenvalue(qp.H, 1e-8);
  const double step = lmax > 0.0 ? 1.0 / lmax : 1.0;
  for (int i = 0; i < steps; ++i) z = project_simplex(z - step * (qp.H * z + qp.c));
  return z;
}

struct ActiveSetOutcome {
  Vector z;
  int iterations = 0;
  bool converged = false;
};

// Primal active-set method. The working set holds coordinates pinned at zero;
// on the free coordinates the equality-constrained subproblem is solved in
// the reduced space z_F = z0 + Z p with Z = [I; -1'] (last free coordinate
// eliminated). Zero-curvature directions of the reduced Hessian are followed
// to the boundary, so singular A is handled without regularization.
ActiveSetOutcome active_set(const Restricted& qp, int max_iterations) {
  const int m = static_cast<int>(qp.c.size());
  ActiveSetOutcome out;
  out.z = Vector::Constant(m, 1.0 / m);
  std::vector<bool> pinned(m, false);

  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    std::vector<int> free;
    for (int i = 0; i < m; ++i)
      if (!pinned[i]) free.push_back(i);
    const int mf = static_cast<int>(free.size());

    bool at_subspace_min = true;
    if (mf > 1) {
      const Vector g = qp.H * out.z + qp.c;
      const int r = mf - 1;
      Matrix Z = Matrix::Zero(mf, r);
      Z.topRows(r).setIdentity();
      Z.row(r).setConstant(-1.0);
      Matrix HFF(mf, mf);
      Vector gF(mf);
      for (int a = 0; a < mf; ++a) {
        gF(a) = g(free[a]);
        for (int b = 0; b < mf; ++b) HFF(a, b) = qp.H(free[a], free[b]);
      }
      const Matrix Hr = Z.transpose() * HFF * Z;
      const Vector gr = Z.transpose() * gF;

      Eigen::SelfAdjointEigenSolver<Matrix> eig(Hr);
      const Vector& ev = eig.eigenvalues();
      const Matrix& V = eig.eigenvectors();
      const double thr = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
      const Vector coef = V.transpose() * gr;

      Vector null_part = Vector::Zero(r);
      Vector newton = Vector::Zero(r);
      for (int i = 0; i < r; ++i) {
        if (ev(i) <= thr)
          null_part += coef(i) * V.col(i);
        else
          newton -= (coef(i) / ev(i)) * V.col(i);
      }
      const bool unbounded = null_part.norm() > 1e-12 * (1.0 + gr.norm());
      const Vector p = unbounded ? Vector(-null_part) : newton;
      const Vector d = Z * p;

      if (d.lpNorm<Eigen::Infinity>() > 1e-15) {
        double alpha = unbounded ? std::numeric_limits<double>::infinity() : 1.0;
        int blocking = -1;
        for (int a = 0; a < mf; ++a) {
          if (d(a) < 0.0) {
            const double ratio = -out.z(free[a]) / d(a);
            if (ratio < alpha) {
              alpha = ratio;
              blocking = free[a];
            }
          }
        }
        if (!std::isfinite(alpha)) return out;  // cannot happen on the simplex
        for (int a = 0; a < mf; ++a) out.z(free[a]) += alpha * d(a);
        if (blocking >= 0) {
          out.z(blocking) = 0.0;
          pinned[blocking] = true;
          at_subspace_min = false;
        } else if (unbounded) {
          at_subspace_min = false;
        }
      }
    }
    if (!at_subspace_min) continue;

    // Multipliers of the pinned coordinates; release the most negative one.
    const Vector g = qp.H * out.z + qp.c;
    double beta = 0.0;
    for (int i : free) beta -= g(i);
    beta /= static_cast<double>(mf);
    const double tol = 1e-12 * (1.0 + g.lpNorm<Eigen::Infinity>());
    int release = -1;
    double most_negative = -tol;
    for (int i = 0; i < m; ++i) {
      if (!pinned[i]) continue;
      const double lambda = g(i) + beta;
      if (lambda < most_negative) {
        most_negative = lambda;
        release = i;
      }
    }
    if (release < 0) {
      out.converged = true;
      return out;
    }
    pinned[release] = false;
  }
  return out;
}

}  // namespace

PolishResult polish_support(const ProblemSpec& spec, const Support& support) {
  const Eigen::Index n = spec.mu.size();
  check_support(support, n);
  const int m = static_cast<int>(support.size());

  Restricted qp;
  qp.H.resize(m, m);
  qp.c.resize(m);
  for (int a = 0; a < m; ++a) {
    qp.c(a) = -spec.tau * spec.mu(support[a]);
    for (int b = 0; b < m; ++b) qp.H(a, b) = 2.0 * spec.A(support[a], support[b]);
  }

  PolishResult res;
  Vector z;
  if (m == 1) {
    z = Vector::Ones(1);
  } else {
    ActiveSetOutcome as = active_set(qp, 50 + 10 * m);
    res.iterations = as.iterations;
    z = as.z;
    if (!as.converged) {
      spdlog::warn("polish: active set hit its cap on |L|={}, using projected gradient", m);
      z = projected_gradient(qp, project_simplex(z), 500);
      res.fallback = true;
    }
    // Ratio-test round-off can leave -1e-17 entries; restore exact feasibility.
    z = z.cwiseMax(0.0);
    z /= z.sum();
  }

  res.x = Vector::Zero(n);
  for (int a = 0; a < m; ++a) res.x(support[a]) = z(a);
  res.objective = objective_f(spec, res.x);
  return res;
}

KktCertificate kkt_check(const ProblemSpec& spec, const Vector& x, const Support& support) {
  const Eigen::Index n = spec.mu.size();
  if (x.size() != n) throw Error(ErrorCode::BadDimension, "x has wrong length");
  check_support(support, n);

  std::vector<bool> in_support(n, false);
  for (int i : support) in_support[i] = true;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in_support[i] && x(i) != 0.0)
      throw Error(ErrorCode::BadSupport, "nonzero weight at index " + std::to_string(i) +
                                             " outside the support");

  constexpr double kPositive = 1e-10;
  const Vector g = 2.0 * (spec.A * x) - spec.tau * spec.mu;

  KktCertificate cert;
  cert.support = support;
  cert.lambda = Vector::Zero(n);

  int positives = 0;
  double sum = 0.0;
  for (int i : support) {
    if (x(i) > kPositive) {
      sum += g(i);
      ++positives;
    }
  }
  if (positives == 0) throw Error(ErrorCode::BadSupport, "no strictly positive weight on support");
  cert.beta = -sum / positives;

  double min_lambda = 0.0;
  for (int i : support) {
    const double r = g(i) + cert.beta;
    if (x(i) > kPositive) {
      cert.stationarity_residual = std::max(cert.stationarity_residual, std::abs(r));
    } else {
      cert.lambda(i) = r;
      min_lambda = std::min(min_lambda, r);
      cert.complementarity_residual = std::max(cert.complementarity_residual, std::abs(r * x(i)));
    }
  }
  cert.dual_feasibility_violation = std::max(0.0, -min_lambda);
  return cert;
}

}  // namespace ccmv
