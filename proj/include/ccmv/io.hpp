#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ccmv/backtest.hpp"
#include "ccmv/model.hpp"

namespace ccmv::io {

using nlohmann::json;

/// Strict returns CSV: header "date,T1,...,Tn", then one row per period with
/// an ISO date (YYYY-MM-DD) and n decimal returns. Errors name the line and
/// column (1-based) of the offending cell.
ReturnsMatrix parse_returns_csv(std::istream& in);
ReturnsMatrix read_returns_csv(const std::string& path);
void write_returns_csv(std::ostream& out, const ReturnsMatrix& returns);

/// {"A": [[...]], "mu": [...], "tau": t, "k": k}
ProblemSpec problem_from_json(const json& j);
json problem_to_json(const ProblemSpec& spec);
ProblemSpec read_problem_json(const std::string& path);

json solution_to_json(const Solution& sol);
Solution solution_from_json(const json& j);
Solution read_solution_json(const std::string& path);

/// rho,inner_iters,q,infeas,inner_capped,safeguard_reset
void write_trace_csv(std::ostream& out, const Solution& sol);

json backtest_to_json(const BacktestReport& rep);
/// One row per window: row index, then one column per ticker.
void write_weights_csv(std::ostream& out, const BacktestReport& rep);

}  // namespace ccmv::io
