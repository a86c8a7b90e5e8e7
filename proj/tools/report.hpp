#ifndef CFSTAB_TOOLS_REPORT_HPP
#define CFSTAB_TOOLS_REPORT_HPP

// JSON serialization of results, and CSV sample/table I/O.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "cfstab/cfstab.hpp"

namespace cfstab::cli {

using json = nlohmann::json;

inline json to_json(const Vector& v) { return json(v.values()); }

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(json(std::vector<double>(m.row(i).begin(), m.row(i).end())));
  return rows;
}

inline json to_json(const GridSpec& g) { return {{"T", g.T}, {"points_per_axis", g.points_per_axis}, {"dim", g.dim}}; }

inline json to_json(const DependenceEstimate& e) {
  return {{"epsilon", e.epsilon},       {"T", e.T},
          {"argmax_t1", to_json(e.argmax_t1)}, {"argmax_t2", to_json(e.argmax_t2)},
          {"grid", to_json(e.grid)},    {"n", e.n},
          {"standard_error", e.standard_error}};
}

inline json ratio(double num, double den) { return den > 0.0 ? json(num / den) : json(nullptr); }

inline json to_json(const BoundReport& r) {
  const auto& m = r.measured;
  return {{"T", r.T},
          {"T_prime", r.T_prime},
          {"p", r.p},
          {"epsilon", r.epsilon},
          {"epsilon_se", r.epsilon_se},
          {"d", r.d},
          {"L", r.L},
          {"C_eps", r.C_eps},
          {"cov_bound", r.cov_bound},
          {"log_resid_bound", r.log_resid_bound},
          {"kolm_bound", r.kolm_bound ? json(*r.kolm_bound) : json(nullptr)},
          {"measured",
           {{"class_deficits", m.class_deficits},
            {"cov_resid_lhs", m.cov_resid_lhs},
            {"go_resid", m.go_resid},
            {"log_resid_max", m.log_resid_max},
            {"projection_kolmogorov", m.projection_kolmogorov}}},
          {"ratios",
           {{"max_deficit_over_C_eps", ratio(m.max_deficit(), r.C_eps)},
            {"cov_resid_over_bound", ratio(m.cov_resid_lhs, r.cov_bound)},
            {"log_resid_over_bound", ratio(m.log_resid_max, r.log_resid_bound)}}}};
}

inline json to_json(const SeparationReport& r) {
  return {{"pairwise", to_json(r.pairwise)},
          {"max_pairwise", r.max_pairwise},
          {"mutual", r.mutual},
          {"is_DP", r.is_DP},
          {"delta1_gaussianity", r.delta1_gaussianity},
          {"delta1", r.delta1},
          {"delta2", r.delta2},
          {"eps_threshold", r.eps_threshold},
          {"M_used", to_json(r.M_used)},
          {"verdicts", {{"a", r.verdict_a}, {"b", r.verdict_b}, {"c", r.verdict_c}, {"agree", r.agree}}}};
}

inline json to_json(const EntropyGap& g) {
  return {{"class_id", g.class_id},
          {"knn_entropy", g.knn},
          {"gaussian_entropy", g.gaussian},
          {"gap", g.gap},
          {"standard_error", g.standard_error},
          {"moment_margin_min_eig", g.moment_margin_min_eig}};
}

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Reads a sample file: a header row of column names, then one sample per line.
inline Matrix read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open sample file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::ParseError, path + ": missing header row");
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rows;
    std::size_t start = 0, fields = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      double v = 0.0;
      const auto first = field.data() + (field.size() && field[0] == '+' ? 1 : 0);
      const auto res = std::from_chars(first, field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v))
        fail(ErrorKind::ParseError, path + ": bad number on data line " + std::to_string(rows));
      values.push_back(v);
      ++fields;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields != cols) fail(ErrorKind::ParseError, path + ": wrong field count on data line " + std::to_string(rows));
  }
  if (rows == 0) fail(ErrorKind::ParseError, path + ": no samples");
  return Matrix(rows, cols, std::move(values));
}

inline void write_samples_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
  for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "x" << j + 1;
  out << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << "\n";
  }
}

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {"lambda",          "seed",          "epsilon_hat",   "T_prime",
                                                "p_floor",         "C_eps",         "cov_bound_rhs", "cov_resid_lhs",
                                                "log_resid_max",   "log_resid_bound", "class_id",    "deficit"};
  return cols;
}

}  // namespace cfstab::cli

#endif  // CFSTAB_TOOLS_REPORT_HPP
