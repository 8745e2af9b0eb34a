#pragma once

// Instance generators and independent reference computations shared by the
// unit and acceptance suites. Nothing here calls into the solver paths it is
// used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ccmv/model.hpp"

namespace ccmv::testing {

/// B B' / r with B an n x r standard normal matrix (rank min(n, r)).
inline Matrix random_psd(std::mt19937_64& rng, int n, int rank) {
  std::normal_distribution<double> normal;
  Matrix B(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) B(i, j) = normal(rng);
  Matrix A = B * B.transpose() / static_cast<double>(rank);
  return 0.5 * (A + A.transpose());
}

/// Random instance with a mix of full-rank and rank-deficient covariances,
/// mu uniform on [0, 1] and tau uniform on [0.1, 1].
inline ProblemSpec random_problem(std::mt19937_64& rng, int n, int k) {
  std::uniform_int_distribution<int> rank_dist(1, n + 2);
  std::uniform_real_distribution<double> mu_dist(0.0, 1.0);
  std::uniform_real_distribution<double> tau_dist(0.1, 1.0);
  ProblemSpec spec;
  spec.A = random_psd(rng, n, rank_dist(rng));
  spec.mu.resize(n);
  for (int i = 0; i < n; ++i) spec.mu(i) = mu_dist(rng);
  spec.tau = tau_dist(rng);
  spec.k = k;
  return spec;
}

/// Minimizer of q_rho(., y) over e'x = 1 from the assembled KKT system
/// [2(A + rho I) e; e' 0][x; beta] = [tau mu + 2 rho y; 1].
inline Vector kkt_x_step(const ProblemSpec& spec, double rho, const Vector& y) {
  const int n = spec.n();
  Matrix K = Matrix::Zero(n + 1, n + 1);
  K.topLeftCorner(n, n) = 2.0 * spec.A;
  K.topLeftCorner(n, n).diagonal().array() += 2.0 * rho;
  K.block(0, n, n, 1).setOnes();
  K.block(n, 0, 1, n).setOnes();
  Vector rhs(n + 1);
  rhs.head(n) = spec.tau * spec.mu + 2.0 * rho * y;
  rhs(n) = 1.0;
  return K.fullPivLu().solve(rhs).head(n);
}

/// Calls fn on every k-subset of {0..n-1} in lexicographic order.
inline void for_each_subset(int n, int k, const std::function<void(const Support&)>& fn) {
  Support comb(k);
  for (int i = 0; i < k; ++i) comb[i] = i;
  while (true) {
    fn(comb);
    int pos = k - 1;
    while (pos >= 0 && comb[pos] == n - k + pos) --pos;
    if (pos < 0) return;
    ++comb[pos];
    for (int j = pos + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
}

/// ||x - z||^2 summed in index order.
inline double squared_distance(const Vector& x, const Vector& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (x(i) - z(i)) * (x(i) - z(i));
  return s;
}

/// min over k-supports S of ||x - z_S||^2 with z_S = max(x, 0) on S, 0 elsewhere.
inline double brute_force_projection_distance(const Vector& x, int k) {
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(static_cast<int>(x.size()), k, [&](const Support& s) {
    Vector z = Vector::Zero(x.size());
    for (int i : s) z(i) = std::max(x(i), 0.0);
    best = std::min(best, squared_distance(x, z));
  });
  return best;
}

/// Uniformly random point of the simplex restricted to a random k-support.
inline Vector random_feasible_point(std::mt19937_64& rng, int n, int k) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::exponential_distribution<double> expo(1.0);
  Vector x = Vector::Zero(n);
  for (int i = 0; i < k; ++i) x(idx[i]) = expo(rng);
  return x / x.sum();
}

/// Exact feasibility plus exact zeros off the reported support.
inline bool cardinality_guarantee(const Solution& sol, int k) {
  if (static_cast<int>(sol.support.size()) > k) return false;
  std::vector<bool> in(sol.weights.size(), false);
  for (int i : sol.support) in[i] = true;
  for (Eigen::Index i = 0; i < sol.weights.size(); ++i)
    if (!in[i] && sol.weights(i) != 0.0) return false;
  return is_feasible(sol.weights, k);
}

}  // namespace ccmv::testing
