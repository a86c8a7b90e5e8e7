#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace cfstab;
using namespace cfstab::cli;

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> grid_T;
  std::optional<int> grid_points;
  std::optional<std::size_t> n;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON experiment configuration");
  app->add_option("--seed", f.seed, "RNG seed (overrides the config)");
  app->add_option("--out", f.out, "write the JSON envelope here instead of stdout");
  app->add_option("--grid-T", f.grid_T, "1-norm radius of the evaluation lattice");
  app->add_option("--grid-points", f.grid_points, "odd number of lattice points per axis");
  app->add_option("--n", f.n, "sample count");
}

ExperimentConfig load(const CommonFlags& f) {
  ExperimentConfig cfg = f.config ? parse_config(*f.config) : ExperimentConfig{};
  if (f.seed) cfg.seed = *f.seed;
  if (f.n) cfg.n = *f.n;
  if (f.grid_T) cfg.grid.T = *f.grid_T;
  if (f.grid_points) cfg.grid.points_per_axis = *f.grid_points;
  validate(cfg.grid);
  require(cfg.n >= 1, ErrorKind::InvalidArgument, "--n must be >= 1");
  return cfg;
}

json effective(const ExperimentConfig& cfg) {
  return {{"file", cfg.raw},
          {"effective", {{"n", cfg.n}, {"seed", cfg.seed}, {"mode", cfg.mode}, {"grid", to_json(cfg.grid)}}}};
}

void emit(const json& env, const std::optional<std::string>& path) {
  const std::string text = env.dump(2) + "\n";
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) fail(ErrorKind::ParseError, "cannot write '" + *path + "'");
  out << text;
}

int report_error(const std::string& kind, const std::string& message, const json& violations, int code) {
  json rec = {{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!violations.is_null()) rec["violations"] = violations;
  std::cerr << rec.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic-function stability toolkit"};
  app.require_subcommand(1);

  CommonFlags depend_f, verify_f, sweep_f, bss_f, entropy_f, bounds_f;
  std::optional<std::string> x_path, y_path, csv_path;
  std::optional<double> b_eps, b_p, b_T, b_tp;
  std::optional<std::size_t> b_d, b_L;

  auto* depend = app.add_subcommand("depend", "(epsilon, T)-dependence of two sample files or a system");
  add_common(depend, depend_f);
  depend->add_option("--x", x_path, "CSV sample file for the first block");
  depend->add_option("--y", y_path, "CSV sample file for the second block");

  auto* verify = app.add_subcommand("verify", "stability bounds paired with measurements");
  add_common(verify, verify_f);

  auto* sweep = app.add_subcommand("sweep", "contamination sweep, one CSV row per (lambda, seed)");
  add_common(sweep, sweep_f);
  sweep->add_option("--csv", csv_path, "CSV output path");

  auto* bss = app.add_subcommand("bss", "separation test for a mixing model");
  add_common(bss, bss_f);

  auto* entropy = app.add_subcommand("entropy", "per-class entropy gaps");
  add_common(entropy, entropy_f);

  auto* bounds = app.add_subcommand("bounds", "evaluate the bound constants");
  add_common(bounds, bounds_f);
  bounds->add_option("--epsilon", b_eps, "dependence level");
  bounds->add_option("--d", b_d, "dimension");
  bounds->add_option("--L", b_L, "number of classes");
  bounds->add_option("--p", b_p, "c.f. floor in (0, 1]");
  bounds->add_option("--T", b_T, "radius T (T' = T/4 unless given)");
  bounds->add_option("--t-prime", b_tp, "explicit T'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("UsageError", e.what(), nullptr, 2);
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    if (depend->parsed()) {
      const ExperimentConfig cfg = load(depend_f);
      json payload;
      if (x_path || y_path) {
        if (!x_path || !y_path) fail(ErrorKind::InvalidArgument, "--x and --y must be given together");
        payload = run_depend_files(*x_path, *y_path, cfg.grid);
      } else {
        payload = run_depend_system(cfg);
      }
      emit(envelope("depend", effective(cfg), {cfg.seed}, elapsed(), payload), depend_f.out ? depend_f.out : cfg.out_json);
    } else if (verify->parsed()) {
      const ExperimentConfig cfg = load(verify_f);
      const json payload = run_verify(cfg);
      emit(envelope("verify", effective(cfg), {cfg.seed}, elapsed(), payload), verify_f.out ? verify_f.out : cfg.out_json);
    } else if (sweep->parsed()) {
      const ExperimentConfig cfg = load(sweep_f);
      const json payload = run_sweep(cfg, csv_path ? csv_path : cfg.out_csv);
      const std::vector<std::uint64_t> seeds = cfg.sweep ? cfg.sweep->seeds : std::vector<std::uint64_t>{};
      emit(envelope("sweep", effective(cfg), seeds, elapsed(), payload), sweep_f.out ? sweep_f.out : cfg.out_json);
    } else if (bss->parsed()) {
      const ExperimentConfig cfg = load(bss_f);
      const json payload = run_bss(cfg);
      emit(envelope("bss", effective(cfg), {cfg.seed}, elapsed(), payload), bss_f.out ? bss_f.out : cfg.out_json);
    } else if (entropy->parsed()) {
      const ExperimentConfig cfg = load(entropy_f);
      const json payload = run_entropy(cfg);
      emit(envelope("entropy", effective(cfg), {cfg.seed}, elapsed(), payload),
           entropy_f.out ? entropy_f.out : cfg.out_json);
    } else if (bounds->parsed()) {
      const ExperimentConfig cfg = load(bounds_f);
      BoundsConfig b = cfg.bounds.value_or(BoundsConfig{});
      if (b_eps) b.epsilon = *b_eps;
      if (b_d) b.d = *b_d;
      if (b_L) b.L = *b_L;
      if (b_p) b.p = *b_p;
      if (b_T) b.T = *b_T;
      if (b_tp) b.T_prime = *b_tp;
      require(b.T > 0.0, ErrorKind::InvalidArgument, "--T must be positive");
      const json payload = run_bounds(b);
      emit(envelope("bounds", effective(cfg), {}, elapsed(), payload), bounds_f.out ? bounds_f.out : cfg.out_json);
    }
    return 0;
  } catch (const ConfigError& e) {
    json v = json::array();
    for (const auto& x : e.violations()) v.push_back({{"path", x.path}, {"message", x.message}});
    return report_error(std::string(to_string(e.kind())), e.what(), v, exit_code(e.kind()));
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.kind())), e.what(), nullptr, exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("Internal", e.what(), nullptr, 4);
  }
}
