#include <gtest/gtest.h>

#include "cli_runner.hpp"
#include "commands.hpp"

using namespace cfstab;
using namespace cfstab::cli;

namespace {

const char* kMinimalKb = R"({
  "system": {"A": [[[1]], [[1]]], "B": [[[1]], [[-1]]],
             "sources": [{"law": {"family": "gaussian"}}, {"law": {"family": "gaussian"}}]},
  "mode": "analytic"
})";

std::vector<Violation> violations_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool has_path(const std::vector<Violation>& v, const std::string& path) {
  for (const auto& x : v)
    if (x.path == path) return true;
  return false;
}

}  // namespace

TEST(ParseConfig, MinimalKacBernstein) {
  const ExperimentConfig cfg = parse_config_text(kMinimalKb);
  ASSERT_TRUE(cfg.system.has_value());
  EXPECT_EQ(cfg.system->C()[0](0, 0), 1.0);
  EXPECT_EQ(cfg.system->C()[1](0, 0), -1.0);
  EXPECT_EQ(cfg.mode, "analytic");
  EXPECT_EQ(cfg.grid.points_per_axis, 41);
}

TEST(ParseConfig, PresetEquivalentToExplicit) {
  const auto a = parse_config_text(R"({"system": {"preset": "kac-bernstein", "source": {"law": {"family": "laplace"}}}})");
  ASSERT_TRUE(a.system.has_value());
  EXPECT_EQ(a.system->L(), 2u);
  EXPECT_EQ(a.system->classes().size(), 2u);
}

TEST(ParseConfig, SingularANamed) {
  const auto v = violations_of(R"({"system": {"A": [[[0]], [[1]]], "B": [[[1]], [[-1]]],
      "sources": [{"law": {"family": "gaussian"}}, {"law": {"family": "gaussian"}}]}})");
  ASSERT_TRUE(has_path(v, "/system/A/0"));
  bool named = false;
  for (const auto& x : v) named = named || x.message.find("A_1") != std::string::npos;
  EXPECT_TRUE(named);
}

TEST(ParseConfig, ContaminationRange) {
  const auto v = violations_of(R"({"system": {"preset": "kac-bernstein", "source": {"law": {"family": "gaussian"}},
      "contamination": 1.5}})");
  EXPECT_TRUE(has_path(v, "/system/contamination"));
}

TEST(ParseConfig, EveryViolationListed) {
  const auto v = violations_of(R"({"foo": 1, "grid": {"points_per_axis": 40}, "n": -3, "mode": "fast"})");
  EXPECT_TRUE(has_path(v, "/foo"));
  EXPECT_TRUE(has_path(v, "/grid/points_per_axis"));
  EXPECT_TRUE(has_path(v, "/n"));
  EXPECT_TRUE(has_path(v, "/mode"));
}

TEST(ParseConfig, UnknownNestedKeyRejected) {
  const auto v = violations_of(R"({"system": {"preset": "kac-bernstein", "source": {"law": {"family": "uniform", "low": 0}}}})");
  EXPECT_TRUE(has_path(v, "/system/source/law/low"));
}

TEST(ParseConfig, MalformedJsonIsParseError) {
  try {
    parse_config_text("{ not json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
}

TEST(ParseConfig, MixingAndSweepBlocks) {
  const auto cfg = parse_config_text(R"({"mixing": {"M": [[0, 2], [3, 0]], "sources": [{"family": "laplace"},
      {"family": "uniform"}]}, "sweep": {"lambdas": [0, 0.1], "seed_count": 3}})");
  ASSERT_TRUE(cfg.mixing && cfg.sweep);
  EXPECT_EQ(cfg.sweep->seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(cfg.mixing->sources.size(), 2u);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::SchemaError), 2);
  EXPECT_EQ(exit_code(ErrorKind::ParseError), 2);
  EXPECT_EQ(exit_code(ErrorKind::FloorCollapsed), 3);
  EXPECT_EQ(exit_code(ErrorKind::HypothesisViolated), 3);
  EXPECT_EQ(exit_code(ErrorKind::Internal), 4);
}

TEST(Cli, VerifyExactGaussian) {
  const auto cfg = clirun::write_file("kb.json", kMinimalKb);
  const auto r = clirun::run("verify --config '" + cfg.string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json env = json::parse(r.out);
  EXPECT_EQ(env["command"], "verify");
  EXPECT_EQ(env["artifact"], "cfstab");
  EXPECT_TRUE(env.contains("wall_time_s"));
  EXPECT_LE(env["payload"]["epsilon"].get<double>(), 1e-15);
  for (double d : env["payload"]["measured"]["class_deficits"]) EXPECT_LE(d, 1e-10);
}

TEST(Cli, SweepCsvContract) {
  const auto cfg = clirun::write_file("sweep.json", R"({"system": {"preset": "kac-bernstein",
      "source": {"law": {"family": "gaussian", "variance": 0.25}}}, "n": 2000,
      "sweep": {"lambdas": [0, 0.1, 0.2], "seeds": [4, 5]}})");
  const auto csv = clirun::scratch_dir() / "sweep.csv";
  const auto r = clirun::run("sweep --config '" + cfg.string() + "' --csv '" + csv.string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(clirun::slurp(csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "lambda,seed,epsilon_hat,T_prime,p_floor,C_eps,cov_bound_rhs,cov_resid_lhs,log_resid_max,"
            "log_resid_bound,class_id,deficit");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].substr(0, 4), "0,4,");
  EXPECT_EQ(rows[1].substr(0, 4), "0,5,");
  EXPECT_EQ(rows[5].substr(0, 6), "0.2,5,");
  for (const auto& row : rows) EXPECT_EQ(std::count(row.begin(), row.end(), ','), 11);
}

TEST(Cli, BssDiagonalMixing) {
  const auto cfg = clirun::write_file("bss.json", R"({"mixing": {"M": [[0, 2], [3, 0]],
      "sources": [{"family": "laplace"}, {"family": "uniform"}]}, "n": 20000, "seed": 3})");
  const auto r = clirun::run("bss --config '" + cfg.string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json env = json::parse(r.out);
  EXPECT_TRUE(env["payload"]["separation"]["is_DP"].get<bool>());
  EXPECT_LT(env["payload"]["round_trip"]["max_abs_error"].get<double>(), 1e-8);
}

TEST(Cli, BoundsFromFlags) {
  const auto r = clirun::run("bounds --epsilon 0.001 --d 2 --L 2 --p 0.5 --T 4");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json env = json::parse(r.out);
  EXPECT_NEAR(env["payload"]["C_eps"].get<double>(), 276.48, 1e-9);
  EXPECT_DOUBLE_EQ(env["payload"]["T_prime"].get<double>(), 1.0);
}

TEST(Cli, DependFromSampleFiles) {
  const auto x = clirun::write_file("x.csv", "a\n1\n-1\n1\n-1\n0.5\n");
  const auto y = clirun::write_file("y.csv", "b\n1\n-1\n1\n-1\n0.5\n");
  const auto r = clirun::run("depend --x '" + x.string() + "' --y '" + y.string() + "' --grid-points 11");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_GT(json::parse(r.out)["payload"]["epsilon"].get<double>(), 0.1);
}

TEST(Cli, EntropyCommand) {
  const auto cfg = clirun::write_file("ent.json", R"({"system": {"preset": "kac-bernstein",
      "source": {"law": {"family": "gaussian"}}}, "n": 5000})");
  const auto r = clirun::run("entropy --config '" + cfg.string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["payload"]["gaps"].size(), 2u);
}

TEST(Cli, SchemaErrorExitsTwoWithRecord) {
  const auto cfg = clirun::write_file("bad.json", R"({"system": {"preset": "kac-bernstein",
      "source": {"law": {"family": "gaussian"}}, "contamination": 1.5}, "foo": 1})");
  const auto r = clirun::run("verify --config '" + cfg.string() + "'");
  EXPECT_EQ(r.exit_code, 2);
  const json rec = json::parse(r.err);
  EXPECT_EQ(rec["error"], "SchemaError");
  EXPECT_EQ(rec["exit_code"], 2);
  EXPECT_GE(rec["violations"].size(), 2u);
}

TEST(Cli, NumericalPreconditionExitsThree) {
  const auto cfg = clirun::write_file("gauss_mix.json", R"({"mixing": {"M": [[1, 1], [1, -1]],
      "sources": [{"family": "gaussian"}, {"family": "gaussian", "variance": 2}]}, "n": 1000})");
  const auto r = clirun::run("bss --config '" + cfg.string() + "'");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(json::parse(r.err)["error"], "HypothesisViolated");
}

TEST(Cli, MissingFileAndBadFlag) {
  const auto r = clirun::run("verify --config /nonexistent/cfg.json");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "ParseError");
  const auto r2 = clirun::run("verify --grid-points 40");
  EXPECT_EQ(r2.exit_code, 2);
  EXPECT_NO_THROW(json::parse(r2.err));
  const auto r3 = clirun::run("frobnicate");
  EXPECT_EQ(r3.exit_code, 2);
}

TEST(Cli, PayloadReproducible) {
  const auto cfg = clirun::write_file("rep.json", R"({"system": {"preset": "kac-bernstein",
      "source": {"law": {"family": "laplace"}}}, "n": 5000, "seed": 11})");
  const auto a = clirun::run("verify --config '" + cfg.string() + "'");
  const auto b = clirun::run("verify --config '" + cfg.string() + "'");
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(json::parse(a.out)["payload"].dump(), json::parse(b.out)["payload"].dump());
}

TEST(Cli, OutFlagWritesFile) {
  const auto out = clirun::scratch_dir() / "bounds.json";
  const auto r = clirun::run("bounds --epsilon 0.01 --out '" + out.string() + "'");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NEAR(json::parse(clirun::slurp(out))["payload"]["kolm_bound"].get<double>(), 1.83906, 1e-5);
}
