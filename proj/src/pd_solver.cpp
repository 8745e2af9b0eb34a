#include "ccmv/pd_solver.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ccmv {

PenaltyFactorization build_factorization(const ProblemSpec& spec, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw Error(ErrorCode::BadConfig, "penalty must be positive and finite");
  const Eigen::Index n = spec.mu.size();
  if (spec.A.rows() != n || spec.A.cols() != n)
    throw Error(ErrorCode::BadDimension, "A and mu disagree in size");

  PenaltyFactorization f;
  f.rho = rho;
  Matrix shifted = spec.A;
  shifted.diagonal().array() += rho;
  f.chol.compute(shifted);
  if (f.chol.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalBreakdown, "Cholesky of A + rho I failed");
  f.s = f.chol.solve(Vector::Ones(n));
  f.t = f.chol.solve(spec.tau * spec.mu);
  f.ets = f.s.sum();
  if (!(f.ets > 0.0) || !f.s.allFinite() || !f.t.allFinite())
    throw Error(ErrorCode::NumericalBreakdown, "degenerate factorization");
  return f;
}

Vector x_step(const PenaltyFactorization& fact, const ProblemSpec& spec, const Vector& y) {
  if (y.size() != spec.mu.size()) throw Error(ErrorCode::BadDimension, "y has wrong length");
  // x = 1/2 (A + rho I)^{-1} (tau mu + 2 rho y + c e) with c fixing e'x = 1.
  const Vector v = fact.t + fact.chol.solve(2.0 * fact.rho * y);
  const double c = (1.0 - 0.5 * v.sum()) / (0.5 * fact.ets);
  return 0.5 * (v + c * fact.s);
}

Vector y_step(const Vector& x, int k) {
  const int n = static_cast<int>(x.size());
  if (k < 1 || k > n) throw Error(ErrorCode::BadK, "k out of range in y_step");
  Vector z = x.cwiseMax(0.0);
  if (k == n) return z;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&](int a, int b) { return z(a) > z(b) || (z(a) == z(b) && a < b); };
  std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), before);

  Vector y = Vector::Zero(n);
  for (int i = 0; i < k; ++i) y(idx[i]) = z(idx[i]);
  return y;
}

namespace {

double relative_change(const Vector& now, const Vector& before) {
  return (now - before).lpNorm<Eigen::Infinity>() / std::max(now.lpNorm<Eigen::Infinity>(), 1.0);
}

}  // namespace

BcdResult bcd_inner(const ProblemSpec& spec, const PenaltyFactorization& fact, const Vector& y0,
                    const SolverConfig& cfg) {
  BcdResult r;
  r.y = y0;
  r.q_trace.reserve(16);
  Vector x_prev;

  for (int l = 1; l <= cfg.max_inner; ++l) {
    const Vector y_prev = r.y;
    r.x = x_step(fact, spec, y_prev);
    r.y = y_step(r.x, spec.k);
    r.iterations = l;

    const double q = penalty_q(spec, fact.rho, r.x, r.y);
    if (!r.q_trace.empty()) {
      const double last = r.q_trace.back();
      if (q > last + 1e-9 * (1.0 + std::abs(last)))
        throw Error(ErrorCode::MonotonicityViolation,
                    "q rose from " + std::to_string(last) + " to " + std::to_string(q) +
                        " at inner iteration " + std::to_string(l));
    }
    r.q_trace.push_back(q);

    if (l >= 2) {
      const double change = std::max(relative_change(r.x, x_prev), relative_change(r.y, y_prev));
      if (change <= cfg.eps_inner) return r;
    }
    x_prev = r.x;
  }
  r.capped = true;
  return r;
}

BcdResult bcd_inner(const ProblemSpec& spec, double rho, const Vector& y0,
                    const SolverConfig& cfg) {
  return bcd_inner(spec, build_factorization(spec, rho), y0, cfg);
}

double compute_upsilon(const ProblemSpec& spec, const PenaltyFactorization& first,
                       const Vector& x_feas, const Vector& y0, double slack) {
  const Vector x = x_step(first, spec, y0);
  return std::max(objective_f(spec, x_feas), penalty_q(spec, first.rho, x, y0)) + slack;
}

double resolve_rho0(const ProblemSpec& spec, const SolverConfig& cfg, bool* raised) {
  constexpr double kEigTol = 1e-10;
  const double lmax = max_eigenvalue(spec.A, kEigTol);
  // Inflate by the eigen tolerance so the bound holds for the true lambda_max.
  const double floor = lmax * (1.0 + 10 * kEigTol) + 1.0;
  const bool up = cfg.rho0 < floor;
  if (raised) *raised = up;
  return up ? floor : cfg.rho0;
}

Solution ccmv_pd_solve(const ProblemSpec& spec, const SolverConfig& cfg) {
  validate_problem(spec);
  cfg.validate();

  Solution sol;
  sol.solver = "pd";
  sol.rho0 = resolve_rho0(spec, cfg, &sol.rho0_raised);
  if (sol.rho0_raised)
    spdlog::debug("pd: rho0 raised from {} to {} (lambda_max(A) + 1)", cfg.rho0, sol.rho0);

  const Vector x_feas = make_feasible_point(spec);
  PenaltyFactorization fact = build_factorization(spec, sol.rho0);
  Vector y0 = x_feas;
  sol.upsilon = compute_upsilon(spec, fact, x_feas, y0, cfg.upsilon_slack);

  Vector y = y0;
  bool converged = false;
  bool reset_pending = false;
  for (int j = 0; j < cfg.max_outer; ++j) {
    const BcdResult inner = bcd_inner(spec, fact, y0, cfg);
    y = inner.y;

    OuterRecord rec;
    rec.rho = fact.rho;
    rec.inner_iterations = inner.iterations;
    rec.q_value = inner.q_trace.back();
    rec.infeasibility = (inner.x - inner.y).lpNorm<Eigen::Infinity>();
    rec.inner_capped = inner.capped;
    rec.safeguard_reset = reset_pending;
    sol.trace.push_back(rec);
    spdlog::debug("pd: outer {} rho={:.3e} inner={} q={:.10g} infeas={:.3e}", j, rec.rho,
                  rec.inner_iterations, rec.q_value, rec.infeasibility);

    if (rec.infeasibility <= cfg.eps_outer) {
      converged = true;
      break;
    }
    if (j + 1 == cfg.max_outer) break;

    const double rho_next = sol.rho0 * std::pow(cfg.zeta, j + 1);
    if (!std::isfinite(rho_next)) break;
    fact = build_factorization(spec, rho_next);

    // Safeguard: restart from the feasible point when the warm start would
    // leave the level set bounded by upsilon.
    const Vector x_probe = x_step(fact, spec, y);
    reset_pending = penalty_q(spec, rho_next, x_probe, y) > sol.upsilon;
    if (reset_pending) {
      ++sol.safeguard_resets;
      y0 = x_feas;
    } else {
      y0 = y;
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
