#include "ccmv/synthetic.hpp"

#include <cstdio>
#include <random>

namespace ccmv {

ProblemSpec synthetic_factor_problem(int n, int k, double tau, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 0.1);

  const int m = std::max(5, n / 20);
  Matrix F(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) F(i, j) = normal(rng);

  ProblemSpec spec;
  spec.A = F * F.transpose() / static_cast<double>(m);
  const double d = 0.01 * spec.A.trace() / n;
  spec.A.diagonal().array() += d;
  spec.A = 0.5 * (spec.A + spec.A.transpose());
  spec.mu.resize(n);
  for (int i = 0; i < n; ++i) spec.mu(i) = uniform(rng);
  spec.tau = tau;
  spec.k = k;
  return spec;
}

ReturnsMatrix synthetic_returns(int periods, int assets, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> beta_dist(0.5, 1.5);
  std::uniform_real_distribution<double> alpha_dist(-0.005, 0.015);
  std::uniform_real_distribution<double> vol_dist(0.03, 0.10);

  Vector beta(assets), alpha(assets), vol(assets);
  for (int i = 0; i < assets; ++i) {
    beta(i) = beta_dist(rng);
    alpha(i) = alpha_dist(rng);
    vol(i) = vol_dist(rng);
  }

  ReturnsMatrix r;
  r.values.resize(periods, assets);
  for (int t = 0; t < periods; ++t) {
    const double market = 0.008 + 0.045 * normal(rng);
    for (int i = 0; i < assets; ++i)
      r.values(t, i) = alpha(i) + beta(i) * market + vol(i) * normal(rng);
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-01", 2016 + t / 12, t % 12 + 1);
    r.dates.emplace_back(date);
  }
  for (int i = 0; i < assets; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "S%03d", i + 1);
    r.tickers.emplace_back(name);
  }
  return r;
}

}  // namespace ccmv
