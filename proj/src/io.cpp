#include "ccmv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ccmv::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = std::stoi(s.substr(5, 2));
  const int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path + "'");
  return in;
}

json parse_json_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail(path + ": " + e.what());
  }
}

}  // namespace

ReturnsMatrix parse_returns_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = split_commas(line);
    break;
  }
  if (header.empty()) parse_fail("returns CSV is empty");
  if (header.front() != "date") parse_fail("line " + std::to_string(line_no) +
                                           ", column 1: header must start with 'date'");
  if (header.size() < 2) parse_fail("line " + std::to_string(line_no) + ": no ticker columns");

  ReturnsMatrix r;
  r.tickers.assign(header.begin() + 1, header.end());
  for (std::size_t c = 0; c < r.tickers.size(); ++c)
    if (r.tickers[c].empty())
      parse_fail("line " + std::to_string(line_no) + ", column " + std::to_string(c + 2) +
                 ": empty ticker");
  const std::size_t n = r.tickers.size();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n + 1)
      parse_fail("line " + std::to_string(line_no) + ": expected " + std::to_string(n + 1) +
                 " cells, found " + std::to_string(cells.size()));
    if (!is_iso_date(cells[0]))
      parse_fail("line " + std::to_string(line_no) + ", column 1: '" + cells[0] +
                 "' is not an ISO date");
    std::vector<double> row(n);
    for (std::size_t c = 0; c < n; ++c)
      if (!parse_double(cells[c + 1], row[c]))
        parse_fail("line " + std::to_string(line_no) + ", column " + std::to_string(c + 2) +
                   ": '" + cells[c + 1] + "' is not a finite number");
    r.dates.push_back(cells[0]);
    rows.push_back(std::move(row));
  }

  r.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t c = 0; c < n; ++c) r.values(t, c) = rows[t][c];
  return r;
}

ReturnsMatrix read_returns_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  try {
    return parse_returns_csv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_returns_csv(std::ostream& out, const ReturnsMatrix& returns) {
  out << "date";
  for (const auto& t : returns.tickers) out << ',' << t;
  out << '\n' << std::setprecision(17);
  for (int t = 0; t < returns.periods(); ++t) {
    out << (t < static_cast<int>(returns.dates.size()) ? returns.dates[t] : "2000-01-01");
    for (int j = 0; j < returns.assets(); ++j) out << ',' << returns.values(t, j);
    out << '\n';
  }
}

namespace {

Vector vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) parse_fail(std::string("'") + name + "' must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      parse_fail(std::string("'") + name + "'[" + std::to_string(i) + "] is not a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) parse_fail("problem JSON must be an object");
  for (const char* key : {"A", "mu"})
    if (!j.contains(key)) parse_fail(std::string("problem JSON lacks '") + key + "'");

  ProblemSpec spec;
  spec.mu = vector_from_json(j["mu"], "mu");
  const json& a = j["A"];
  const auto n = spec.mu.size();
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != n)
    parse_fail("'A' must have " + std::to_string(n) + " rows");
  spec.A.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = a[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      parse_fail("'A' row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!row[c].is_number())
        parse_fail("'A'[" + std::to_string(r) + "][" + std::to_string(c) + "] is not a number");
      spec.A(r, c) = row[c].get<double>();
    }
  }
  if (j.contains("tau")) spec.tau = j["tau"].get<double>();
  if (j.contains("k")) spec.k = j["k"].get<int>();
  return spec;
}

json problem_to_json(const ProblemSpec& spec) {
  json a = json::array();
  for (Eigen::Index r = 0; r < spec.A.rows(); ++r) a.push_back(vector_to_json(spec.A.row(r).transpose()));
  return json{{"A", a}, {"mu", vector_to_json(spec.mu)}, {"tau", spec.tau}, {"k", spec.k}};
}

ProblemSpec read_problem_json(const std::string& path) {
  try {
    return problem_from_json(parse_json_file(path));
  } catch (const json::exception& e) {
    parse_fail(path + ": " + e.what());
  }
}

json solution_to_json(const Solution& sol) {
  json trace = json::array();
  for (const auto& r : sol.trace)
    trace.push_back({{"rho", r.rho},
                     {"inner_iters", r.inner_iterations},
                     {"q", r.q_value},
                     {"infeas", r.infeasibility},
                     {"inner_capped", r.inner_capped},
                     {"safeguard_reset", r.safeguard_reset}});
  return json{{"solver", sol.solver},
              {"weights", vector_to_json(sol.weights)},
              {"support", sol.support},
              {"objective", sol.objective},
              {"kkt",
               {{"beta", sol.kkt.beta},
                {"stationarity", sol.kkt.stationarity_residual},
                {"dual_violation", sol.kkt.dual_feasibility_violation},
                {"complementarity", sol.kkt.complementarity_residual},
                {"lambda", vector_to_json(sol.kkt.lambda)},
                {"support", sol.kkt.support}}},
              {"kkt_residual", sol.kkt_residual},
              {"status", to_string(sol.status)},
              {"rho0", sol.rho0},
              {"rho0_raised", sol.rho0_raised},
              {"upsilon", sol.upsilon},
              {"safeguard_resets", sol.safeguard_resets},
              {"polish_fallback", sol.polish_fallback},
              {"trace", trace}};
}

Solution solution_from_json(const json& j) {
  try {
    Solution sol;
    sol.weights = vector_from_json(j.at("weights"), "weights");
    sol.support = j.contains("support") ? j["support"].get<Support>() : support_of(sol.weights);
    sol.objective = j.value("objective", 0.0);
    sol.solver = j.value("solver", std::string("external"));
    sol.status = solve_status_from_string(j.value("status", std::string("Converged")));
    if (j.contains("kkt")) {
      const json& k = j["kkt"];
      sol.kkt.beta = k.value("beta", 0.0);
      sol.kkt.stationarity_residual = k.value("stationarity", 0.0);
      sol.kkt.dual_feasibility_violation = k.value("dual_violation", 0.0);
      sol.kkt.complementarity_residual = k.value("complementarity", 0.0);
      if (k.contains("lambda")) sol.kkt.lambda = vector_from_json(k["lambda"], "lambda");
      if (k.contains("support")) sol.kkt.support = k["support"].get<Support>();
    }
    sol.kkt_residual = j.value("kkt_residual", sol.kkt.max_residual());
    sol.rho0 = j.value("rho0", 0.0);
    sol.rho0_raised = j.value("rho0_raised", false);
    sol.upsilon = j.value("upsilon", 0.0);
    sol.safeguard_resets = j.value("safeguard_resets", 0);
    sol.polish_fallback = j.value("polish_fallback", false);
    if (j.contains("trace")) {
      for (const json& r : j["trace"]) {
        OuterRecord rec;
        rec.rho = r.at("rho").get<double>();
        rec.inner_iterations = r.at("inner_iters").get<int>();
        rec.q_value = r.at("q").get<double>();
        rec.infeasibility = r.at("infeas").get<double>();
        rec.inner_capped = r.value("inner_capped", false);
        rec.safeguard_reset = r.value("safeguard_reset", false);
        sol.trace.push_back(rec);
      }
    }
    return sol;
  } catch (const json::exception& e) {
    parse_fail(std::string("solution JSON: ") + e.what());
  }
}

Solution read_solution_json(const std::string& path) {
  return solution_from_json(parse_json_file(path));
}

void write_trace_csv(std::ostream& out, const Solution& sol) {
  out << "rho,inner_iters,q,infeas,inner_capped,safeguard_reset\n" << std::setprecision(17);
  for (const auto& r : sol.trace)
    out << r.rho << ',' << r.inner_iterations << ',' << r.q_value << ',' << r.infeasibility << ','
        << (r.inner_capped ? 1 : 0) << ',' << (r.safeguard_reset ? 1 : 0) << '\n';
}

namespace {

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json backtest_to_json(const BacktestReport& rep) {
  json weights = json::array();
  for (const auto& w : rep.weights_by_window) weights.push_back(vector_to_json(w));
  return json{{"tickers", rep.tickers},
              {"rebalance_rows", rep.rebalance_rows},
              {"weights_by_window", weights},
              {"oos_returns", rep.oos_returns},
              {"window_flagged", rep.window_flagged},
              {"window_notes", rep.window_notes},
              {"mu_hat", rep.mu_hat},
              {"sigma_hat", rep.sigma_hat},
              {"sharpe_hat", optional_to_json(rep.sharpe_hat)},
              {"in_sample",
               {{"return", rep.in_sample.ret},
                {"risk", rep.in_sample.risk},
                {"sharpe", optional_to_json(rep.in_sample.sharpe)}}}};
}

void write_weights_csv(std::ostream& out, const BacktestReport& rep) {
  out << "row";
  for (const auto& t : rep.tickers) out << ',' << t;
  out << '\n' << std::setprecision(17);
  for (std::size_t w = 0; w < rep.weights_by_window.size(); ++w) {
    out << rep.rebalance_rows[w];
    for (Eigen::Index i = 0; i < rep.weights_by_window[w].size(); ++i)
      out << ',' << rep.weights_by_window[w](i);
    out << '\n';
  }
}

}  // namespace ccmv::io
