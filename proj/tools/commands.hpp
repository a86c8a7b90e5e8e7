#ifndef CFSTAB_TOOLS_COMMANDS_HPP
#define CFSTAB_TOOLS_COMMANDS_HPP

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace cfstab::cli {

inline constexpr const char* kArtifactName = "cfstab";
inline constexpr const char* kArtifactVersion = "1.0.0";

inline const GoSystem& need_system(const ExperimentConfig& cfg) {
  if (!cfg.system) throw ConfigError(ErrorKind::SchemaError, {{"/system", "this command requires a system"}});
  return *cfg.system;
}

inline json run_verify(const ExperimentConfig& cfg) {
  const GoSystem& system = need_system(cfg);
  const GridSpec grid = cfg.grid.with_dim(system.d());
  const BoundReport r = cfg.mode == "analytic" ? verify_stability(system, grid)
                                               : verify_stability(system, cfg.n, cfg.seed, grid);
  return to_json(r);
}

struct SweepRow {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  BoundReport report;
  std::size_t class_id = 0;
  double deficit = 0.0;
};

inline std::vector<SweepRow> sweep_rows(const GoSystem& base, const SweepConfig& sweep, std::size_t n,
                                        const GridSpec& grid) {
  std::vector<SweepRow> rows;
  for (double lambda : sweep.lambdas) {
    const GoSystem system = base.L() >= 2 ? contaminate(base, lambda) : base;
    if (base.L() < 2 && lambda > 0.0) fail(ErrorKind::InvalidArgument, "contamination needs L >= 2");
    for (std::uint64_t seed : sweep.seeds) {
      SweepRow row;
      row.lambda = lambda;
      row.seed = seed;
      row.report = verify_stability(system, n, seed, grid.with_dim(system.d()));
      const auto& defs = row.report.measured.class_deficits;
      row.class_id = static_cast<std::size_t>(std::max_element(defs.begin(), defs.end()) - defs.begin());
      row.deficit = defs[row.class_id];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  const auto& cols = sweep_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
  out += "\n";
  for (const auto& r : rows) {
    const auto& b = r.report;
    out += format_number(r.lambda) + "," + std::to_string(r.seed) + "," + format_number(b.epsilon) + "," +
           format_number(b.T_prime) + "," + format_number(b.p) + "," + format_number(b.C_eps) + "," +
           format_number(b.cov_bound) + "," + format_number(b.measured.cov_resid_lhs) + "," +
           format_number(b.measured.log_resid_max) + "," + format_number(b.log_resid_bound) + "," +
           std::to_string(r.class_id + 1) + "," + format_number(r.deficit) + "\n";
  }
  return out;
}

inline json run_sweep(const ExperimentConfig& cfg, const std::optional<std::string>& csv_path) {
  const GoSystem& system = need_system(cfg);
  if (!cfg.sweep) throw ConfigError(ErrorKind::SchemaError, {{"/sweep", "the sweep command requires a sweep block"}});
  const auto rows = sweep_rows(system, *cfg.sweep, cfg.n, cfg.grid);
  const std::string csv = sweep_csv(rows);
  if (csv_path) {
    std::ofstream out(*csv_path, std::ios::binary);
    if (!out) fail(ErrorKind::ParseError, "cannot write '" + *csv_path + "'");
    out << csv;
  }
  json table = json::array();
  for (const auto& r : rows)
    table.push_back({{"lambda", r.lambda}, {"seed", r.seed}, {"class_id", r.class_id + 1}, {"deficit", r.deficit},
                     {"report", to_json(r.report)}});
  return {{"columns", sweep_columns()}, {"rows", table}};
}

inline json run_depend_system(const ExperimentConfig& cfg) {
  const GoSystem& system = need_system(cfg);
  const GridSpec grid = cfg.grid.with_dim(system.d());
  if (cfg.mode == "analytic") return to_json(epsilon_T_dependence(system, grid));
  const SampleSet s = sample_system(system, cfg.n, cfg.seed);
  return to_json(epsilon_T_dependence(s.S1, s.S2, grid));
}

inline json run_depend_files(const std::string& x_path, const std::string& y_path, const GridSpec& grid) {
  const Matrix x = read_samples_csv(x_path);
  const Matrix y = read_samples_csv(y_path);
  if (x.rows() != y.rows()) fail(ErrorKind::InvalidArgument, "sample files must have the same number of rows");
  return to_json(epsilon_T_dependence(x, y, grid));
}

inline json run_bss(const ExperimentConfig& cfg) {
  if (!cfg.mixing) throw ConfigError(ErrorKind::SchemaError, {{"/mixing", "the bss command requires a mixing block"}});
  const MixingConfig& mc = *cfg.mixing;
  const MixingModel model(mc.M, mc.sources);
  const SeparationReport rep =
      separation_test(model, cfg.n, cfg.seed, cfg.grid.with_dim(1), mc.delta1, mc.delta2, mc.eps_threshold);

  // Exact-mode round trip on the rounded mixing matrix.
  const MixingModel used = model.with_M(rep.M_used);
  const MixedSamples mixed = mix(used, cfg.n, cfg.seed);
  const Whitened w = whiten(mixed.Z, used.covariance());
  const Matrix v = extract_orthogonal(w.filter * used.M(), Matrix::identity(used.d()), used.D_S());
  const Matrix y = recover(w.W, v);
  Vector inv_sd(used.d());
  for (std::size_t k = 0; k < used.d(); ++k) inv_sd[k] = 1.0 / std::sqrt(used.D_S()(k, k));
  const double err = max_abs_diff(y, apply_rows(Matrix::diagonal(inv_sd), mixed.S));
  return {{"separation", to_json(rep)}, {"round_trip", {{"V", to_json(v)}, {"max_abs_error", err}}}};
}

inline json run_entropy(const ExperimentConfig& cfg) {
  const GoSystem& system = need_system(cfg);
  json gaps = json::array();
  for (const auto& g : entropy_gap(system, cfg.n, cfg.seed, cfg.neighbours)) gaps.push_back(to_json(g));
  return {{"gaps", gaps}, {"k", cfg.neighbours}, {"n", cfg.n}};
}

inline json run_bounds(const BoundsConfig& b) {
  double tp = b.T_prime.value_or(0.25 * b.T);
  if (!b.T_prime && !b.C.empty()) tp = t_prime(b.C, b.T);
  const BoundReport r = bound_constants(b.epsilon, b.d, b.L, b.p, tp);
  return {{"epsilon", r.epsilon},         {"d", r.d},
          {"L", r.L},                     {"p", r.p},
          {"T", b.T},                     {"T_prime", r.T_prime},
          {"C_eps", r.C_eps},             {"cov_bound", r.cov_bound},
          {"log_resid_bound", r.log_resid_bound},
          {"kolm_bound", r.kolm_bound ? json(*r.kolm_bound) : json(nullptr)}};
}

/// Wraps a payload with the config echo and run metadata.
inline json envelope(const std::string& command, const json& config, const std::vector<std::uint64_t>& seeds,
                     double wall_time, const json& payload) {
  return {{"artifact", kArtifactName}, {"version", kArtifactVersion}, {"command", command},
          {"config", config},          {"seeds", seeds},              {"wall_time_s", wall_time},
          {"payload", payload}};
}

/// Exit code for a library error kind.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::SchemaError:
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::Internal:
    case ErrorKind::GridMismatch:
      return 4;
    default:
      return 3;
  }
}

}  // namespace cfstab::cli

#endif  // CFSTAB_TOOLS_COMMANDS_HPP
