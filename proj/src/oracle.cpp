#include "ccmv/oracle.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccmv/pd_solver.hpp"

namespace ccmv {

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    // c * (n - k + i) / i stays integral at every step.
    const std::int64_t num = n - k + i;
    if (c > std::numeric_limits<std::int64_t>::max() / num)
      return std::numeric_limits<std::int64_t>::max();
    c = c * num / i;
  }
  return c;
}

RestrictedSolve restricted_qp_solve(const ProblemSpec& spec, const Support& support) {
  const int m = static_cast<int>(support.size());
  if (m < 1) throw Error(ErrorCode::BadSupport, "empty support");
  if (m > 20) throw Error(ErrorCode::TooLarge, "restricted solve limited to |S| <= 20");
  const Eigen::Index n = spec.mu.size();

  RestrictedSolve best;
  best.objective = std::numeric_limits<double>::infinity();
  Vector fallback_x;
  double fallback_obj = std::numeric_limits<double>::infinity();

  const std::uint32_t patterns = (1u << m);
  std::vector<int> active;
  active.reserve(m);
  for (std::uint32_t mask = 1; mask < patterns; ++mask) {
    active.clear();
    for (int a = 0; a < m; ++a)
      if (mask & (1u << a)) active.push_back(support[a]);
    const int p = static_cast<int>(active.size());

    // [2 A_PP  e; e' 0] [x_P; beta] = [tau mu_P; 1]
    Matrix kkt = Matrix::Zero(p + 1, p + 1);
    Vector rhs(p + 1);
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) kkt(a, b) = 2.0 * spec.A(active[a], active[b]);
      kkt(a, p) = 1.0;
      kkt(p, a) = 1.0;
      rhs(a) = spec.tau * spec.mu(active[a]);
    }
    rhs(p) = 1.0;
    Eigen::FullPivLU<Matrix> lu(kkt);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      ++best.patterns_skipped;
      spdlog::debug("oracle: singular KKT system for pattern mask {:#x}", mask);
      continue;
    }
    const Vector sol = lu.solve(rhs);

    bool primal_ok = true;
    Vector x = Vector::Zero(n);
    for (int a = 0; a < p; ++a) {
      if (sol(a) < -1e-12) primal_ok = false;
      x(active[a]) = std::max(sol(a), 0.0);
    }
    if (!primal_ok) continue;
    x /= x.sum();

    const double beta = sol(p);
    const Vector g = 2.0 * (spec.A * x) - spec.tau * spec.mu;
    const double tol = 1e-9 * (1.0 + g.lpNorm<Eigen::Infinity>());
    bool dual_ok = true;
    for (int a = 0; a < m && dual_ok; ++a)
      if (!(mask & (1u << a)) && g(support[a]) + beta < -tol) dual_ok = false;

    const double obj = objective_f(spec, x);
    if (dual_ok) {
      if (obj < best.objective) {
        best.objective = obj;
        best.x = x;
      }
    } else if (obj < fallback_obj) {
      fallback_obj = obj;
      fallback_x = x;
    }
  }

  if (best.x.size() == 0) {
    if (fallback_x.size() == 0)
      throw Error(ErrorCode::NumericalBreakdown, "no feasible zero pattern found");
    spdlog::warn("oracle: no pattern passed the multiplier test; using best primal candidate");
    best.x = fallback_x;
    best.objective = fallback_obj;
  }
  return best;
}

namespace {

// Lexicographic unranking of k-subsets of {0, ..., n-1}.
Support unrank_combination(int n, int k, std::int64_t rank) {
  Support comb(k);
  int x = 0;
  for (int i = 0; i < k; ++i) {
    while (true) {
      const std::int64_t c = binomial(n - x - 1, k - i - 1);
      if (c > rank) break;
      rank -= c;
      ++x;
    }
    comb[i] = x++;
  }
  return comb;
}

bool next_combination(Support& comb, int n) {
  const int k = static_cast<int>(comb.size());
  int pos = k - 1;
  while (pos >= 0 && comb[pos] == n - k + pos) --pos;
  if (pos < 0) return false;
  ++comb[pos];
  for (int j = pos + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  return true;
}

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  std::int64_t rank = -1;
  Vector x;
};

// Scans ranks [first, last) and keeps the first minimal candidate.
Candidate scan_range(const ProblemSpec& spec, std::int64_t first, std::int64_t last) {
  Candidate best;
  if (first >= last) return best;
  const int n = spec.n();
  Support comb = unrank_combination(n, spec.k, first);
  for (std::int64_t r = first; r < last; ++r) {
    const RestrictedSolve rs = restricted_qp_solve(spec, comb);
    if (rs.objective < best.objective) {
      best.objective = rs.objective;
      best.rank = r;
      best.x = rs.x;
    }
    if (r + 1 < last) next_combination(comb, n);
  }
  return best;
}

}  // namespace

OracleResult brute_force_solve(const ProblemSpec& spec, Exec exec, std::int64_t budget) {
  const int n = spec.n();
  if (spec.k < 1 || spec.k > n) throw Error(ErrorCode::BadK, "k out of range");
  if (spec.k > 20) throw Error(ErrorCode::TooLarge, "oracle limited to k <= 20");
  const std::int64_t total = binomial(n, spec.k);
  if (total > budget)
    throw Error(ErrorCode::TooLarge, "C(" + std::to_string(n) + "," + std::to_string(spec.k) +
                                         ") supports exceed the oracle budget");

  Candidate best;
  if (exec == Exec::Serial) {
    best = scan_range(spec, 0, total);
  } else {
    const std::int64_t chunks = std::min<std::int64_t>(total, 256);
    std::vector<Candidate> partial(chunks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c)
      partial[c] = scan_range(spec, c * total / chunks, (c + 1) * total / chunks);
    // Chunks are rank-ordered, so a strict comparison keeps the smallest rank.
    for (auto& p : partial)
      if (p.objective < best.objective) best = std::move(p);
  }

  OracleResult out;
  out.x = best.x;
  out.objective = best.objective;
  out.support = support_of(best.x);
  out.supports_examined = total;
  return out;
}

Solution oracle_solution(const ProblemSpec& spec, const OracleResult& result) {
  Solution sol;
  sol.solver = "oracle";
  sol.weights = result.x;
  sol.support = result.support;
  sol.objective = result.objective;
  sol.status = SolveStatus::Converged;
  sol.upsilon = objective_f(spec, make_feasible_point(spec));
  sol.kkt = kkt_check(spec, result.x, result.support);
  sol.kkt_residual = sol.kkt.max_residual();
  return sol;
}

}  // namespace ccmv
