#pragma once

#include <cstdint>

#include "ccmv/model.hpp"

namespace ccmv {

/// Seeded factor-model instance: A = F F'/m + d I with F an n x m standard
/// normal loading, m = max(5, n / 20), d = 0.01 trace(F F'/m) / n, and mu
/// uniform on [0, 0.1].
ProblemSpec synthetic_factor_problem(int n, int k, double tau, std::uint64_t seed);

/// Seeded monthly returns from a one-factor model (market beta plus
/// idiosyncratic noise), dated from 2016-01-01. Tickers are S001, S002, ...
ReturnsMatrix synthetic_returns(int periods, int assets, std::uint64_t seed);

}  // namespace ccmv
