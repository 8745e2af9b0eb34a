#include "ccmv/padm.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccmv/pd_solver.hpp"

namespace ccmv {

namespace {

inline double prox_coordinate(double v, double y, double c, double theta) {
  const double w = v - theta;
  double h;
  if (w > y + c)
    h = w - c;
  else if (w < y - c)
    h = w + c;
  else
    h = y;
  return std::max(h, 0.0);
}

double prox_sum(const Vector& v, const Vector& y, double c, double theta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += prox_coordinate(v(i), y(i), c, theta);
  return s;
}

}  // namespace

Vector prox_l1_simplex(const Vector& v, const Vector& y, double c) {
  const Eigen::Index n = v.size();
  if (y.size() != n) throw Error(ErrorCode::BadDimension, "prox: v and y differ in length");

  std::vector<double> knots;
  knots.reserve(4 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    knots.push_back(v(i) - y(i) - c);
    knots.push_back(v(i) - y(i) + c);
    knots.push_back(v(i) - c);
    knots.push_back(v(i) + c);
  }
  std::sort(knots.begin(), knots.end());

  // S(theta) is continuous, nonincreasing and linear between knots; it has
  // slope -n left of the first knot and vanishes right of the last one.
  double theta;
  const double s_first = prox_sum(v, y, c, knots.front());
  if (s_first <= 1.0) {
    theta = knots.front() - (1.0 - s_first) / static_cast<double>(n);
  } else {
    std::size_t lo = 0, hi = knots.size() - 1;  // S(lo) > 1 >= S(hi)
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (prox_sum(v, y, c, knots[mid]) > 1.0)
        lo = mid;
      else
        hi = mid;
    }
    const double s_lo = prox_sum(v, y, c, knots[lo]);
    const double s_hi = prox_sum(v, y, c, knots[hi]);
    theta = s_lo == s_hi ? knots[hi]
                         : knots[lo] + (s_lo - 1.0) * (knots[hi] - knots[lo]) / (s_lo - s_hi);
  }

  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = prox_coordinate(v(i), y(i), c, theta);
  return x;
}

double padm_phi(const ProblemSpec& spec, double rho, const Vector& x, const Vector& y) {
  return objective_f(spec, x) + rho * (x - y).lpNorm<1>();
}

PadmXStepResult padm_x_step(const ProblemSpec& spec, double rho, const Vector& y,
                            const PadmXStepOptions& opts) {
  const int n = spec.n();
  if (y.size() != n) throw Error(ErrorCode::BadDimension, "y has wrong length");
  if (rho < 0.0) throw Error(ErrorCode::BadConfig, "rho must be nonnegative");

  const double lmax = opts.lambda_max >= 0.0 ? opts.lambda_max : max_eigenvalue(spec.A);
  const double lipschitz = lmax > 0.0 ? 2.0 * lmax : 1.0;
  const double step = 1.0 / lipschitz;
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : std::max(10 * n, 500);
  // Objective gap after a prox-gradient step is at most
  // 2 L ||x+ - x|| diam(simplex), with diam = sqrt(2).
  const double move_tol = opts.tol / (2.0 * std::sqrt(2.0) * lipschitz);

  PadmXStepResult r;
  r.x = opts.warm ? project_simplex(*opts.warm) : Vector::Constant(n, 1.0 / n);
  const Vector tau_mu = spec.tau * spec.mu;
  for (int it = 1; it <= cap; ++it) {
    const Vector grad = 2.0 * (spec.A * r.x) - tau_mu;
    Vector next = prox_l1_simplex(r.x - step * grad, y, step * rho);
    const double move = (next - r.x).norm();
    r.x = std::move(next);
    r.iterations = it;
    if (move <= move_tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

double padm_support_cost(const Vector& x, const Support& support) {
  double total_abs = x.lpNorm<1>();
  double abs_in = 0.0;
  double sum_in = 0.0;
  for (int i : support) {
    abs_in += std::abs(x(i));
    sum_in += x(i);
  }
  return (total_abs - abs_in) + std::abs(1.0 - sum_in);
}

Support top_k_by_magnitude(const Vector& x, int k) {
  const int n = static_cast<int>(x.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&](int a, int b) {
    const double fa = std::abs(x(a)), fb = std::abs(x(b));
    return fa > fb || (fa == fb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), before);
  Support s(idx.begin(), idx.begin() + k);
  std::sort(s.begin(), s.end());
  return s;
}

namespace {

// Lexicographically smallest support of minimal cost among all size-k subsets.
Support enumerate_best_support(const Vector& x, int k) {
  const int n = static_cast<int>(x.size());
  const double total_abs = x.lpNorm<1>();
  Support comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  Support best = comb;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    double abs_in = 0.0, sum_in = 0.0;
    for (int i : comb) {
      abs_in += std::abs(x(i));
      sum_in += x(i);
    }
    const double cost = (total_abs - abs_in) + std::abs(1.0 - sum_in);
    if (cost < best_cost) {
      best_cost = cost;
      best = comb;
    }
    int pos = k - 1;
    while (pos >= 0 && comb[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++comb[pos];
    for (int j = pos + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  return best;
}

Support local_search_support(const Vector& x, int k) {
  const int n = static_cast<int>(x.size());
  Support s = top_k_by_magnitude(x, k);
  std::vector<bool> in(n, false);
  for (int i : s) in[i] = true;

  const double total_abs = x.lpNorm<1>();
  double abs_in = 0.0, sum_in = 0.0;
  for (int i : s) {
    abs_in += std::abs(x(i));
    sum_in += x(i);
  }
  double cost = (total_abs - abs_in) + std::abs(1.0 - sum_in);

  for (int pass = 0; pass < 10 * n; ++pass) {
    double best_cost = cost;
    int best_out = -1, best_in = -1;
    for (int a = 0; a < k; ++a) {
      const int i = s[a];
      for (int j = 0; j < n; ++j) {
        if (in[j]) continue;
        const double abs_new = abs_in - std::abs(x(i)) + std::abs(x(j));
        const double sum_new = sum_in - x(i) + x(j);
        const double c = (total_abs - abs_new) + std::abs(1.0 - sum_new);
        if (c < best_cost - 1e-15 * (1.0 + cost)) {
          best_cost = c;
          best_out = a;
          best_in = j;
        }
      }
    }
    if (best_out < 0) break;
    const int i = s[best_out];
    in[i] = false;
    in[best_in] = true;
    abs_in += std::abs(x(best_in)) - std::abs(x(i));
    sum_in += x(best_in) - x(i);
    s[best_out] = best_in;
    cost = best_cost;
  }
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

PadmYStepResult padm_y_step(const Vector& x, int k) {
  const int n = static_cast<int>(x.size());
  if (k < 1 || k > n) throw Error(ErrorCode::BadK, "k out of range in padm_y_step");

  PadmYStepResult r;
  r.support = n <= 20 ? enumerate_best_support(x, k) : local_search_support(x, k);

  r.y = Vector::Zero(n);
  double sum_in = 0.0;
  int anchor = r.support.front();
  for (int i : r.support) {
    r.y(i) = x(i);
    sum_in += x(i);
    if (std::abs(x(i)) > std::abs(x(anchor))) anchor = i;
  }
  r.y(anchor) += 1.0 - sum_in;
  r.cost = padm_support_cost(x, r.support);
  return r;
}

namespace {

double relative_change(const Vector& now, const Vector& before) {
  return (now - before).lpNorm<Eigen::Infinity>() / std::max(now.lpNorm<Eigen::Infinity>(), 1.0);
}

}  // namespace

PadmInnerResult padm_inner(const ProblemSpec& spec, double rho, double lambda_max,
                           const Vector& x0, const Vector& y0, const SolverConfig& cfg) {
  PadmInnerResult r;
  r.x = x0;
  r.y = y0;
  PadmXStepOptions opts;
  opts.lambda_max = lambda_max;

  for (int l = 1; l <= cfg.max_inner; ++l) {
    const Vector x_prev = r.x;
    const Vector y_prev = r.y;
    opts.warm = &x_prev;
    PadmXStepResult xs = padm_x_step(spec, rho, y_prev, opts);
    if (!xs.converged)
      spdlog::debug("padm: x-step stopped at its cap ({} iterations)", xs.iterations);
    r.x = std::move(xs.x);
    r.y = padm_y_step(r.x, spec.k).y;
    r.iterations = l;
    r.phi_trace.push_back(padm_phi(spec, rho, r.x, r.y));

    if (l >= 2 && std::max(relative_change(r.x, x_prev), relative_change(r.y, y_prev)) <=
                      cfg.eps_inner)
      return r;
  }
  r.capped = true;
  return r;
}

Solution ccmv_padm_solve(const ProblemSpec& spec, const SolverConfig& cfg) {
  validate_problem(spec);
  cfg.validate();

  Solution sol;
  sol.solver = "padm";
  sol.rho0 = cfg.rho0;
  const double lmax = max_eigenvalue(spec.A);

  const Vector x_feas = make_feasible_point(spec);
  sol.upsilon = objective_f(spec, x_feas);
  Vector x = x_feas;
  Vector y = x_feas;
  bool converged = false;

  for (int j = 0; j < cfg.max_outer; ++j) {
    const double rho = sol.rho0 * std::pow(cfg.zeta, j);
    if (!std::isfinite(rho)) break;
    PadmInnerResult inner = padm_inner(spec, rho, lmax, x, y, cfg);
    x = std::move(inner.x);
    y = std::move(inner.y);

    OuterRecord rec;
    rec.rho = rho;
    rec.inner_iterations = inner.iterations;
    rec.q_value = inner.phi_trace.back();
    rec.infeasibility = (x - y).lpNorm<1>();
    rec.inner_capped = inner.capped;
    sol.trace.push_back(rec);
    spdlog::debug("padm: outer {} rho={:.3e} inner={} phi={:.10g} l1-infeas={:.3e}", j, rho,
                  rec.inner_iterations, rec.q_value, rec.infeasibility);

    if ((x - y).lpNorm<Eigen::Infinity>() <= cfg.eps_outer) {
      converged = true;
      break;
    }
  }
  sol.status = converged ? SolveStatus::Converged : SolveStatus::MaxIterations;

  const Support polish_set = support_of(y);
  const PolishResult pol = polish_support(spec, polish_set);
  sol.weights = pol.x;
  sol.objective = pol.objective;
  sol.polish_fallback = pol.fallback;
  sol.support = support_of(sol.weights);
  sol.kkt = kkt_check(spec, sol.weights, polish_set);
  sol.kkt_residual = sol.kkt.max_residual();
  return sol;
}

}  // namespace ccmv
