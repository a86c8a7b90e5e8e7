#ifndef CFSTAB_TOOLS_CONFIG_HPP
#define CFSTAB_TOOLS_CONFIG_HPP

// JSON experiment configuration: parsing, schema validation with JSON-pointer
// paths, and conversion into library objects.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfstab/cfstab.hpp"

namespace cfstab::cli {

using json = nlohmann::json;

struct Violation {
  std::string path;
  std::string message;
};

/// Configuration failure carrying every violation found.
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, std::vector<Violation> violations)
      : Error(kind, summarize(violations)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& v) {
    std::string s = std::to_string(v.size()) + " configuration violation(s)";
    if (!v.empty()) s += "; first at " + (v.front().path.empty() ? std::string("/") : v.front().path) + ": " +
                         v.front().message;
    return s;
  }
  std::vector<Violation> violations_;
};

struct SweepConfig {
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
};

struct MixingConfig {
  Matrix M;
  std::vector<CoordinateLaw> sources;
  double delta1 = 0.05;
  double delta2 = 1e-6;
  double eps_threshold = kDefaultEpsThreshold;
};

struct BoundsConfig {
  double epsilon = 0.0;
  std::size_t d = 1;
  std::size_t L = 1;
  double p = 1.0;
  double T = 4.0;
  std::optional<double> T_prime;
  std::vector<Matrix> C;  // when present, T' is evaluated from these
};

struct ExperimentConfig {
  json raw;
  std::optional<GoSystem> system;
  GridSpec grid;
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  std::string mode = "empirical";
  std::optional<SweepConfig> sweep;
  std::optional<MixingConfig> mixing;
  std::size_t neighbours = kDefaultNeighbours;
  std::optional<BoundsConfig> bounds;
  std::optional<std::string> out_json;
  std::optional<std::string> out_csv;
};

namespace detail {

class Checker {
 public:
  void add(const std::string& path, const std::string& msg) { v_.push_back({path, msg}); }
  bool ok() const noexcept { return v_.empty(); }
  std::size_t count() const noexcept { return v_.size(); }
  std::vector<Violation>& violations() noexcept { return v_; }

  /// Rejects keys outside `allowed`; returns false when `j` is not an object.
  bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      add(path, "expected an object");
      return false;
    }
    for (const auto& [key, _] : j.items())
      if (!allowed.count(key)) add(path + "/" + key, "unknown key");
    return true;
  }

  std::optional<double> number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      add(path, "expected a number");
      return std::nullopt;
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      add(path, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::uint64_t> count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
      add(path, "expected a non-negative integer");
      return std::nullopt;
    }
    return j.get<std::uint64_t>();
  }

  std::optional<std::vector<double>> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) {
      add(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool good = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto v = number(j[i], path + "/" + std::to_string(i));
      if (v) out.push_back(*v);
      else good = false;
    }
    if (!good) return std::nullopt;
    return out;
  }

  std::optional<Matrix> matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
      add(path, "expected a non-empty array of rows");
      return std::nullopt;
    }
    const std::size_t rows = j.size(), cols = j[0].size();
    std::vector<double> entries;
    bool good = true;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string rp = path + "/" + std::to_string(r);
      if (!j[r].is_array() || j[r].size() != cols) {
        add(rp, "rows must be arrays of equal length");
        good = false;
        continue;
      }
      for (std::size_t c = 0; c < cols; ++c) {
        auto v = number(j[r][c], rp + "/" + std::to_string(c));
        if (v) entries.push_back(*v);
        else good = false;
      }
    }
    if (!good) return std::nullopt;
    return Matrix(rows, cols, std::move(entries));
  }

 private:
  std::vector<Violation> v_;
};

inline std::optional<CoordinateLaw> parse_law(const json& j, const std::string& path, Checker& ck) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    ck.add(path, "law needs a string field 'family'");
    return std::nullopt;
  }
  const std::string family = j["family"].get<std::string>();
  const std::size_t before = ck.count();
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return ck.number(j[key], path + "/" + key).value_or(fallback);
  };
  std::optional<CoordinateLaw> law;
  if (family == "gaussian") {
    ck.object(j, path, {"family", "mean", "variance"});
    law = GaussianLaw{num("mean", 0.0), num("variance", 1.0)};
  } else if (family == "uniform") {
    ck.object(j, path, {"family", "lo", "hi"});
    law = UniformLaw{num("lo", -1.0), num("hi", 1.0)};
  } else if (family == "laplace") {
    ck.object(j, path, {"family", "location", "scale"});
    law = LaplaceLaw{num("location", 0.0), num("scale", 1.0)};
  } else if (family == "rademacher") {
    ck.object(j, path, {"family"});
    law = RademacherLaw{};
  } else if (family == "gaussian-mixture") {
    ck.object(j, path, {"family", "weights", "means", "variances"});
    GaussianMixtureLaw m;
    for (const char* key : {"weights", "means", "variances"}) {
      if (!j.contains(key)) {
        ck.add(path + "/" + key, "required for gaussian-mixture");
        continue;
      }
      auto v = ck.numbers(j[key], path + "/" + key);
      if (!v) continue;
      if (std::string(key) == "weights") m.weights = *v;
      else if (std::string(key) == "means") m.means = *v;
      else m.variances = *v;
    }
    law = m;
  } else {
    ck.add(path + "/family", "unknown family '" + family + "'");
    return std::nullopt;
  }
  if (ck.count() != before) return std::nullopt;
  try {
    validate(*law);
  } catch (const Error& e) {
    ck.add(path, e.what());
    return std::nullopt;
  }
  return law;
}

inline std::optional<SourceSpec> parse_source(const json& j, const std::string& path, std::size_t d, Checker& ck) {
  if (!ck.object(j, path, {"law", "coords", "transform", "additive_gaussian"})) return std::nullopt;
  const std::size_t before = ck.count();
  SourceSpec spec;
  if (j.contains("law") == j.contains("coords")) {
    ck.add(path, "exactly one of 'law' or 'coords' is required");
    return std::nullopt;
  }
  if (j.contains("law")) {
    if (auto law = parse_law(j["law"], path + "/law", ck)) spec.coords.assign(d, *law);
  } else if (!j["coords"].is_array()) {
    ck.add(path + "/coords", "expected an array of laws");
  } else {
    for (std::size_t k = 0; k < j["coords"].size(); ++k)
      if (auto law = parse_law(j["coords"][k], path + "/coords/" + std::to_string(k), ck)) spec.coords.push_back(*law);
    if (ck.count() == before && spec.coords.size() != d)
      ck.add(path + "/coords", "expected " + std::to_string(d) + " coordinates");
  }
  if (j.contains("transform")) {
    if (auto t = ck.matrix(j["transform"], path + "/transform")) {
      if (t->rows() != d || t->cols() != d) ck.add(path + "/transform", "transform must be d x d");
      else if (!is_invertible(*t)) ck.add(path + "/transform", "transform is singular");
      else spec.transform = *t;
    }
  }
  if (j.contains("additive_gaussian")) {
    auto v = ck.number(j["additive_gaussian"], path + "/additive_gaussian");
    if (v && *v < 0.0) ck.add(path + "/additive_gaussian", "must be >= 0");
    else if (v) spec.additive_gaussian = *v;
  }
  if (ck.count() != before) return std::nullopt;
  return spec;
}

inline std::optional<GoSystem> parse_system(const json& j, const std::string& path, Checker& ck) {
  if (!ck.object(j, path, {"preset", "source", "A", "B", "sources", "class_tolerance", "contamination"}))
    return std::nullopt;
  const std::size_t before = ck.count();
  double tol = kClassTolerance;
  if (j.contains("class_tolerance")) {
    auto v = ck.number(j["class_tolerance"], path + "/class_tolerance");
    if (v && *v < 0.0) ck.add(path + "/class_tolerance", "must be >= 0");
    else if (v) tol = *v;
  }
  double lambda = 0.0;
  if (j.contains("contamination")) {
    auto v = ck.number(j["contamination"], path + "/contamination");
    if (v && (*v < 0.0 || *v > 1.0)) ck.add(path + "/contamination", "lambda must lie in [0, 1]");
    else if (v) lambda = *v;
  }

  std::vector<Matrix> a, b;
  std::vector<SourceSpec> sources;
  if (j.contains("preset")) {
    for (const char* key : {"A", "B", "sources"})
      if (j.contains(key)) ck.add(path + "/" + key, "not allowed together with 'preset'");
    if (!j["preset"].is_string() || j["preset"].get<std::string>() != "kac-bernstein") {
      ck.add(path + "/preset", "unknown preset (supported: kac-bernstein)");
      return std::nullopt;
    }
    if (!j.contains("source")) {
      ck.add(path + "/source", "required with a preset");
      return std::nullopt;
    }
    std::size_t d = 1;
    const json& s = j["source"];
    if (s.is_object() && s.contains("coords") && s["coords"].is_array()) d = std::max<std::size_t>(1, s["coords"].size());
    if (s.is_object() && s.contains("transform") && s["transform"].is_array())
      d = std::max<std::size_t>(d, s["transform"].size());
    auto src = parse_source(s, path + "/source", d, ck);
    if (!src || ck.count() != before) return std::nullopt;
    const Matrix id = Matrix::identity(d);
    a = {id, id};
    b = {id, -1.0 * id};
    sources = {*src, *src};
  } else {
    if (j.contains("source")) ck.add(path + "/source", "only allowed together with 'preset'");
    const std::size_t before_arrays = ck.count();
    for (const char* key : {"A", "B", "sources"})
      if (!j.contains(key) || !j[key].is_array() || j[key].empty())
        ck.add(path + "/" + key, "required non-empty array");
    if (ck.count() != before_arrays) return std::nullopt;
    const std::size_t L = j["A"].size();
    if (j["B"].size() != L || j["sources"].size() != L) {
      ck.add(path, "A, B and sources must have the same length");
      return std::nullopt;
    }
    std::optional<std::size_t> d;
    for (const char* key : {"A", "B"})
      for (std::size_t l = 0; l < L; ++l) {
        const std::string mp = path + "/" + key + "/" + std::to_string(l);
        auto m = ck.matrix(j[key][l], mp);
        if (!m) continue;
        if (!d) d = m->rows();
        if (m->rows() != *d || m->cols() != *d) {
          ck.add(mp, "must be " + std::to_string(*d) + " x " + std::to_string(*d));
          continue;
        }
        if (!is_invertible(*m)) {
          ck.add(mp, std::string(key) + "_" + std::to_string(l + 1) + " is singular");
          continue;
        }
        (std::string(key) == "A" ? a : b).push_back(*m);
      }
    for (std::size_t l = 0; l < L; ++l)
      if (auto src = parse_source(j["sources"][l], path + "/sources/" + std::to_string(l), d.value_or(1), ck))
        sources.push_back(*src);
  }
  if (lambda > 0.0 && a.size() < 2) ck.add(path + "/contamination", "contamination needs L >= 2");
  if (ck.count() != before) return std::nullopt;
  try {
    GoSystem system(a, b, sources, tol);
    if (lambda > 0.0) system = contaminate(system, lambda);
    return system;
  } catch (const Error& e) {
    ck.add(path, e.what());
    return std::nullopt;
  }
}

inline void parse_grid(const json& j, const std::string& path, Checker& ck, GridSpec& grid) {
  if (!ck.object(j, path, {"T", "points_per_axis"})) return;
  if (j.contains("T")) {
    auto v = ck.number(j["T"], path + "/T");
    if (v && *v <= 0.0) ck.add(path + "/T", "must be positive");
    else if (v) grid.T = *v;
  }
  if (j.contains("points_per_axis")) {
    auto v = ck.count(j["points_per_axis"], path + "/points_per_axis");
    if (v && (*v < 3 || *v % 2 == 0 || *v > 100001)) ck.add(path + "/points_per_axis", "must be odd and >= 3");
    else if (v) grid.points_per_axis = static_cast<int>(*v);
  }
}

inline std::optional<SweepConfig> parse_sweep(const json& j, const std::string& path, Checker& ck) {
  if (!ck.object(j, path, {"lambdas", "seeds", "seed_count"})) return std::nullopt;
  SweepConfig s;
  if (!j.contains("lambdas")) ck.add(path + "/lambdas", "required");
  else if (auto v = ck.numbers(j["lambdas"], path + "/lambdas")) {
    for (std::size_t i = 0; i < v->size(); ++i)
      if ((*v)[i] < 0.0 || (*v)[i] > 1.0) ck.add(path + "/lambdas/" + std::to_string(i), "lambda must lie in [0, 1]");
    s.lambdas = *v;
  }
  if (j.contains("seeds") == j.contains("seed_count")) {
    ck.add(path, "exactly one of 'seeds' or 'seed_count' is required");
  } else if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) ck.add(path + "/seeds", "expected an array of seeds");
    else
      for (std::size_t i = 0; i < j["seeds"].size(); ++i)
        if (auto v = ck.count(j["seeds"][i], path + "/seeds/" + std::to_string(i))) s.seeds.push_back(*v);
  } else if (auto v = ck.count(j["seed_count"], path + "/seed_count")) {
    for (std::uint64_t i = 0; i < *v; ++i) s.seeds.push_back(i);
  }
  return s;
}

inline std::optional<MixingConfig> parse_mixing(const json& j, const std::string& path, Checker& ck) {
  if (!ck.object(j, path, {"M", "sources", "delta1", "delta2", "eps_threshold"})) return std::nullopt;
  const std::size_t before = ck.count();
  MixingConfig m;
  if (!j.contains("M")) ck.add(path + "/M", "required");
  else if (auto mm = ck.matrix(j["M"], path + "/M")) {
    if (!mm->is_square()) ck.add(path + "/M", "M must be square");
    else if (!is_invertible(*mm)) ck.add(path + "/M", "M is singular");
    else m.M = *mm;
  }
  if (!j.contains("sources") || !j["sources"].is_array()) {
    ck.add(path + "/sources", "required array of laws");
  } else {
    for (std::size_t k = 0; k < j["sources"].size(); ++k)
      if (auto law = parse_law(j["sources"][k], path + "/sources/" + std::to_string(k), ck)) {
        if (std::abs(law_mean(*law)) > kZeroMeanTolerance)
          ck.add(path + "/sources/" + std::to_string(k), "mixing sources must have zero mean");
        m.sources.push_back(*law);
      }
    if (ck.count() == before && m.sources.size() != m.M.rows()) ck.add(path + "/sources", "need one law per row of M");
  }
  for (auto [key, dst] : {std::pair{"delta1", &m.delta1}, {"delta2", &m.delta2}, {"eps_threshold", &m.eps_threshold}})
    if (j.contains(key)) {
      auto v = ck.number(j[key], path + "/" + key);
      if (v && *v < 0.0) ck.add(path + "/" + key, "must be >= 0");
      else if (v) *dst = *v;
    }
  if (ck.count() != before) return std::nullopt;
  return m;
}

inline std::optional<BoundsConfig> parse_bounds(const json& j, const std::string& path, Checker& ck) {
  if (!ck.object(j, path, {"epsilon", "d", "L", "p", "T", "T_prime", "C"})) return std::nullopt;
  const std::size_t before = ck.count();
  BoundsConfig b;
  for (auto [key, dst] : {std::pair{"epsilon", &b.epsilon}, {"p", &b.p}, {"T", &b.T}})
    if (j.contains(key)) {
      if (auto v = ck.number(j[key], path + "/" + key)) *dst = *v;
    }
  if (b.epsilon < 0.0) ck.add(path + "/epsilon", "must be >= 0");
  if (b.p <= 0.0 || b.p > 1.0) ck.add(path + "/p", "must lie in (0, 1]");
  if (b.T <= 0.0) ck.add(path + "/T", "must be positive");
  for (auto [key, dst] : {std::pair{"d", &b.d}, {"L", &b.L}})
    if (j.contains(key)) {
      auto v = ck.count(j[key], path + "/" + key);
      if (v && *v == 0) ck.add(path + "/" + key, "must be >= 1");
      else if (v) *dst = static_cast<std::size_t>(*v);
    }
  if (j.contains("T_prime")) {
    auto v = ck.number(j["T_prime"], path + "/T_prime");
    if (v && *v <= 0.0) ck.add(path + "/T_prime", "must be positive");
    else if (v) b.T_prime = *v;
  }
  if (j.contains("C")) {
    if (!j["C"].is_array() || j["C"].empty()) ck.add(path + "/C", "expected a non-empty array of matrices");
    else
      for (std::size_t l = 0; l < j["C"].size(); ++l) {
        const std::string mp = path + "/C/" + std::to_string(l);
        auto m = ck.matrix(j["C"][l], mp);
        if (!m) continue;
        if (!m->is_square() || !is_invertible(*m)) ck.add(mp, "C_" + std::to_string(l + 1) + " must be invertible");
        else b.C.push_back(*m);
      }
  }
  if (ck.count() != before) return std::nullopt;
  return b;
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const json& j) {
  detail::Checker ck;
  ExperimentConfig cfg;
  cfg.raw = j;
  if (!ck.object(j, "", {"system", "grid", "n", "seed", "mode", "sweep", "mixing", "entropy", "bounds", "output"}))
    throw ConfigError(ErrorKind::SchemaError, std::move(ck.violations()));
  if (j.contains("system")) cfg.system = detail::parse_system(j["system"], "/system", ck);
  if (j.contains("grid")) detail::parse_grid(j["grid"], "/grid", ck, cfg.grid);
  if (j.contains("n")) {
    auto v = ck.count(j["n"], "/n");
    if (v && *v < 1) ck.add("/n", "must be >= 1");
    else if (v) cfg.n = static_cast<std::size_t>(*v);
  }
  if (j.contains("seed"))
    if (auto v = ck.count(j["seed"], "/seed")) cfg.seed = *v;
  if (j.contains("mode")) {
    if (!j["mode"].is_string() || (j["mode"] != "empirical" && j["mode"] != "analytic"))
      ck.add("/mode", "must be 'empirical' or 'analytic'");
    else cfg.mode = j["mode"].get<std::string>();
  }
  if (j.contains("sweep")) cfg.sweep = detail::parse_sweep(j["sweep"], "/sweep", ck);
  if (j.contains("mixing")) cfg.mixing = detail::parse_mixing(j["mixing"], "/mixing", ck);
  if (j.contains("entropy") && ck.object(j["entropy"], "/entropy", {"k"}) && j["entropy"].contains("k")) {
    auto v = ck.count(j["entropy"]["k"], "/entropy/k");
    if (v && (*v < 1 || *v > kMaxNeighbours)) ck.add("/entropy/k", "must lie in [1, 20]");
    else if (v) cfg.neighbours = static_cast<std::size_t>(*v);
  }
  if (j.contains("bounds")) cfg.bounds = detail::parse_bounds(j["bounds"], "/bounds", ck);
  if (j.contains("output") && ck.object(j["output"], "/output", {"json", "csv"})) {
    for (const char* key : {"json", "csv"})
      if (j["output"].contains(key)) {
        if (!j["output"][key].is_string()) ck.add(std::string("/output/") + key, "expected a path string");
        else (std::string(key) == "json" ? cfg.out_json : cfg.out_csv) = j["output"][key].get<std::string>();
      }
  }
  if (!ck.ok()) throw ConfigError(ErrorKind::SchemaError, std::move(ck.violations()));
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ErrorKind::ParseError, {{"", e.what()}});
  }
  return parse_config_json(j);
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ErrorKind::ParseError, {{"", "cannot open config file '" + path + "'"}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace cfstab::cli

#endif  // CFSTAB_TOOLS_CONFIG_HPP
