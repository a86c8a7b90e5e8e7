#ifndef CFSTAB_BOUNDS_HPP
#define CFSTAB_BOUNDS_HPP

// Stability constants (T', floor p, C(eps), covariance, log-residual and
// Kolmogorov bounds) and the pipelines that pair them with measurements.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "cfstab/charfn.hpp"
#include "cfstab/dependence.hpp"
#include "cfstab/models.hpp"
#include "cfstab/stats.hpp"

namespace cfstab {

// ---- scalar distribution functions -----------------------------------------

/// Standard normal d.f. through the library erfc (relative error near machine epsilon).
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

class EmpiricalDF {
 public:
  explicit EmpiricalDF(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), ErrorKind::InvalidArgument, "empirical d.f. of an empty sample");
    std::sort(values_.begin(), values_.end());
  }

  std::size_t n() const noexcept { return values_.size(); }
  const std::vector<double>& sorted() const noexcept { return values_; }

  /// F_n(x) = #{values <= x} / n.
  double operator()(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
  }

 private:
  std::vector<double> values_;
};

/// sup_x |F_n(x) - Phi((x - mean) / sd)|, exact over the jump points.
inline double empirical_kolmogorov(const EmpiricalDF& df, double mean, double sd) {
  require(sd > 0.0, ErrorKind::InvalidArgument, "reference sd must be positive");
  const auto& v = df.sorted();
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double phi = normal_cdf((v[i] - mean) / sd);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - phi), std::abs(static_cast<double>(i) / n - phi)});
  }
  return d;
}

inline double empirical_kolmogorov(std::vector<double> samples, double mean, double sd) {
  return empirical_kolmogorov(EmpiricalDF(std::move(samples)), mean, sd);
}

inline constexpr double kConstantVariance = 1e-10;

struct ProjectionResult {
  double distance = 0.0;
  bool constant = false;  // the projection has (numerically) zero variance
};

/// Kolmogorov distance of the standardized, median-centred projection t^T Y to N(0, 1).
inline ProjectionResult projection_gaussianity(const Matrix& samples, const Vector& t) {
  require(t.size() == samples.cols(), ErrorKind::InvalidArgument, "projection direction has wrong dimension");
  require(std::abs(norm2(t) - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "projection direction must have unit 2-norm");
  std::vector<double> proj(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) s += t[k] * samples(i, k);
    proj[i] = s;
  }
  const double var = variance(proj);
  if (var < kConstantVariance) return {0.0, true};
  const double sd = std::sqrt(var);
  for (double& v : proj) v /= sd;
  const double med = median(proj);
  for (double& v : proj) v -= med;
  return {empirical_kolmogorov(std::move(proj), 0.0, 1.0), false};
}

// ---- constants ----------------------------------------------------------------

/// (T/4) min(1, min_l 1/||C_l^{-1}||, min_{l != m} 1/||(I - C_m C_l^{-1})^{-1}||).
inline double t_prime(const std::vector<Matrix>& c, double T) {
  require(!c.empty(), ErrorKind::InvalidArgument, "t_prime needs at least one coupling matrix");
  require(T > 0.0, ErrorKind::InvalidArgument, "T must be positive");
  const std::size_t d = c[0].rows();
  std::vector<Matrix> inv;
  double m = 1.0;
  for (const auto& cl : c) {
    inv.push_back(invert(cl));
    m = std::min(m, 1.0 / induced_norm_1(inv.back()));
  }
  for (std::size_t l = 0; l < c.size(); ++l)
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k == l) continue;
      const Matrix diff = Matrix::identity(d) - c[k] * inv[l];
      if (!is_invertible(diff))
        fail(ErrorKind::SingularMatrix, "I - C_m C_l^{-1} is singular: merge coincident classes first");
      m = std::min(m, 1.0 / induced_norm_1(invert(diff)));
    }
  return 0.25 * T * m;
}

struct MeasuredQuantities {
  std::vector<double> class_deficits;
  double cov_resid_lhs = 0.0;  // max-abs of sum over classes of Qhat C
  double go_resid = 0.0;       // max-abs of sum_l A_l Q_l B_l^T
  double log_resid_max = 0.0;
  std::vector<double> projection_kolmogorov;  // per class, direction e_1; empty in closed-form mode

  double max_deficit() const {
    return class_deficits.empty() ? 0.0 : *std::max_element(class_deficits.begin(), class_deficits.end());
  }
};

struct BoundReport {
  double T = 0.0;
  double T_prime = 0.0;
  double p = 1.0;
  double epsilon = 0.0;
  double epsilon_se = 0.0;
  std::size_t d = 0;
  std::size_t L = 0;
  double C_eps = 0.0;
  double cov_bound = 0.0;
  double log_resid_bound = 0.0;
  std::optional<double> kolm_bound;
  MeasuredQuantities measured;
};

/// Kolmogorov bound, defined for eps^2 <= 1/2.
inline std::optional<double> kolmogorov_bound(double eps) {
  require(eps >= 0.0, ErrorKind::InvalidArgument, "epsilon must be >= 0");
  if (eps > std::numbers::sqrt2 / 2.0) return std::nullopt;
  if (eps == 0.0) return 0.0;
  const double s = 2.0 * eps * std::log(1.0 / eps) + eps / std::sqrt(2.0 * std::numbers::pi) + 2.0 * eps * eps;
  return 60.0 / std::numbers::pi * s;
}

inline BoundReport bound_constants(double eps, std::size_t d, std::size_t L, double p, double T_prime) {
  if (!(p > 0.0)) fail(ErrorKind::InvalidFloor, "floor p must be positive");
  require(p <= 1.0, ErrorKind::InvalidFloor, "floor p must not exceed 1");
  require(eps >= 0.0 && std::isfinite(eps), ErrorKind::InvalidArgument, "epsilon must be finite and >= 0");
  require(d >= 1 && L >= 1, ErrorKind::InvalidArgument, "d and L must be positive");
  require(T_prime > 0.0, ErrorKind::InvalidArgument, "T' must be positive");
  BoundReport r;
  r.T_prime = T_prime;
  r.p = p;
  r.epsilon = eps;
  r.d = d;
  r.L = L;
  const double dd = static_cast<double>(d), ll = static_cast<double>(L);
  const double p2l = std::pow(p, 2.0 * ll);
  r.C_eps = 1440.0 * dd * dd * (dd + 1.0) * eps / p2l;
  r.cov_bound = 721.0 * ll * dd * dd * (dd + 1.0) * eps / (T_prime * T_prime * p2l);
  r.log_resid_bound = 3.0 * eps / (2.0 * p2l);
  r.kolm_bound = kolmogorov_bound(eps);
  return r;
}

// ---- c.f. floor -----------------------------------------------------------------

namespace detail {

inline void check_floor(double p) {
  if (!(p >= kModulusFloor))
    fail(ErrorKind::FloorCollapsed, "c.f. floor " + std::to_string(p) + " is below 1e-6; shrink T");
}

/// Compass search for a local minimum of h inside the 1-norm ball of radius r.
template <class H>
double compass_minimize(const H& h, Vector t, double step, double r) {
  double best = h(t);
  for (int iter = 0; iter < 4000 && step > 1e-13 && best > 0.0; ++iter) {
    bool moved = false;
    for (std::size_t k = 0; k < t.size() && !moved; ++k)
      for (double sgn : {1.0, -1.0}) {
        Vector c = t;
        c[k] += sgn * step;
        if (norm1(c) > r) continue;
        const double v = h(c);
        if (v < best) {
          best = v;
          t = std::move(c);
          moved = true;
          break;
        }
      }
    if (!moved) step *= 0.5;
  }
  return best;
}

inline constexpr std::size_t kFloorSeeds = 4;

}  // namespace detail

/// min over l and ||t||_1 <= T' of min(|f_l(t)|, |f_l(C_l t)|). Lattice values
/// are refined by a local search from the smallest lattice points so zeros
/// between lattice points are found. Throws FloorCollapsed below 1e-6.
inline double cf_floor_p(const std::vector<MarginalCf>& f, const std::vector<Matrix>& c, double T_prime,
                         int points_per_axis = kDefaultPointsPerAxis, bool refine = true) {
  require(f.size() == c.size() && !f.empty(), ErrorKind::InvalidArgument, "one c.f. per coupling matrix expected");
  require(T_prime > 0.0, ErrorKind::InvalidArgument, "T' must be positive");
  const GridSpec spec{T_prime, points_per_axis, c[0].rows()};
  const Lattice lat = make_lattice(spec);
  double p = 1.0;
  for (std::size_t l = 0; l < f.size(); ++l) {
    const auto h = [&](const Vector& t) { return std::min(std::abs(f[l](t)), std::abs(f[l](c[l] * t))); };
    std::vector<std::pair<double, std::size_t>> vals;
    for (std::size_t g = 0; g < lat.size(); ++g) vals.emplace_back(h(lat.points[g]), g);
    std::sort(vals.begin(), vals.end());
    p = std::min(p, vals.front().first);
    if (!refine) continue;
    for (std::size_t s = 0; s < std::min(detail::kFloorSeeds, vals.size()); ++s)
      p = std::min(p, detail::compass_minimize(h, lat.points[vals[s].second], spec.step(), T_prime));
  }
  detail::check_floor(p);
  return p;
}

/// Closed-form floor over the classes of a system (class sums and representative couplings).
inline double cf_floor_p(const GoSystem& system, double T_prime, int points_per_axis = kDefaultPointsPerAxis) {
  std::vector<MarginalCf> f;
  for (std::size_t k = 0; k < system.classes().size(); ++k)
    f.push_back([&system, k](const Vector& t) { return cf_Z(system, k, t); });
  return cf_floor_p(f, system.class_couplings(), T_prime, points_per_axis, true);
}

/// Empirical floor from sampled class sums, lattice points only.
inline double cf_floor_p(const SampleSet& samples, const std::vector<Matrix>& c, double T_prime,
                         int points_per_axis = kDefaultPointsPerAxis) {
  require(samples.Z.size() == c.size(), ErrorKind::InvalidArgument, "one coupling matrix per class expected");
  const Lattice lat = make_lattice(GridSpec{T_prime, points_per_axis, c[0].rows()});
  double p = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    // f(C t) is the c.f. of C^T Z evaluated at t.
    const auto direct = empirical_cf_on(lat, samples.Z[k]);
    const auto coupled = empirical_cf_on(lat, apply_rows(c[k].transpose(), samples.Z[k]));
    for (std::size_t g = 0; g < lat.size(); ++g) p = std::min({p, std::abs(direct[g]), std::abs(coupled[g])});
  }
  detail::check_floor(p);
  return p;
}

// ---- covariance residuals -----------------------------------------------------

struct CovarianceResiduals {
  Matrix go;       // sum_l A_l Q_l B_l^T
  Matrix coupled;  // sum_l (A_l Q_l A_l^T) C_l
  double go_max = 0.0;
  double coupled_max = 0.0;
};

inline CovarianceResiduals covariance_residuals(const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                                                const std::vector<Matrix>& q) {
  require(!a.empty() && a.size() == b.size() && a.size() == q.size(), ErrorKind::InvalidArgument,
          "A, B and Q must have the same nonzero length");
  const auto c = derive_coupling(a, b);
  const std::size_t d = a[0].rows();
  CovarianceResiduals r{Matrix(d, d), Matrix(d, d)};
  for (std::size_t l = 0; l < a.size(); ++l) {
    r.go += a[l] * q[l] * b[l].transpose();
    r.coupled += a[l] * q[l] * a[l].transpose() * c[l];
  }
  r.go_max = max_abs(r.go);
  r.coupled_max = max_abs(r.coupled);
  return r;
}

/// max-abs of sum_k Qhat_k C_k for class covariances and couplings.
inline double coupled_residual(const std::vector<Matrix>& qhat, const std::vector<Matrix>& c) {
  require(!qhat.empty() && qhat.size() == c.size(), ErrorKind::InvalidArgument, "one covariance per coupling");
  Matrix acc(qhat[0].rows(), qhat[0].cols());
  for (std::size_t k = 0; k < qhat.size(); ++k) acc += qhat[k] * c[k];
  return max_abs(acc);
}

// ---- log residual ---------------------------------------------------------------

struct LogResidual {
  double max_abs = 0.0;
  Vector at_t1;
  Vector at_t2;
};

/// Closed-form max over lattice pairs in the T'-ball of
/// |sum_l g_l(t1 + C_l t2) - g_l(t1) - g_l(C_l t2)|.
inline LogResidual log_residual_check(const std::vector<MarginalCf>& f, const std::vector<Matrix>& c,
                                      const GridSpec& grid) {
  require(f.size() == c.size() && !f.empty(), ErrorKind::InvalidArgument, "one c.f. per coupling matrix expected");
  const Lattice lat = make_lattice(grid.with_dim(c[0].rows()));
  std::vector<std::vector<Complex>> g1(f.size()), g2(f.size());
  for (std::size_t l = 0; l < f.size(); ++l)
    for (const auto& t : lat.points) {
      g1[l].push_back(second_cf(f[l](t)));
      g2[l].push_back(second_cf(f[l](c[l] * t)));
    }
  LogResidual out{-1.0, {}, {}};
  for (std::size_t a = 0; a < lat.size(); ++a) {
    if (!in_half_space(lat.index[a])) continue;
    for (std::size_t b = 0; b < lat.size(); ++b) {
      Complex r = 0.0;
      for (std::size_t l = 0; l < f.size(); ++l)
        r += second_cf(f[l](lat.points[a] + c[l] * lat.points[b])) - g1[l][a] - g2[l][b];
      if (std::abs(r) > out.max_abs) out = {std::abs(r), lat.points[a], lat.points[b]};
    }
  }
  return out;
}

inline LogResidual log_residual_check(const GoSystem& system, const GridSpec& grid) {
  std::vector<MarginalCf> f;
  for (std::size_t k = 0; k < system.classes().size(); ++k)
    f.push_back([&system, k](const Vector& t) { return cf_Z(system, k, t); });
  return log_residual_check(f, system.class_couplings(), grid);
}

/// Empirical version from class sums. f(t1 + C t2) is the joint c.f. of
/// (Z, C^T Z) at (t1, t2), accumulated for all lattice pairs at once.
inline LogResidual log_residual_check(const SampleSet& samples, const std::vector<Matrix>& c, const GridSpec& grid) {
  require(samples.Z.size() == c.size() && !c.empty(), ErrorKind::InvalidArgument,
          "one coupling matrix per class expected");
  const Lattice lat = make_lattice(grid.with_dim(c[0].rows()));
  const auto half = half_space_subset(lat);
  const std::size_t G = lat.size();
  std::vector<Complex> acc(half.size() * G, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Matrix& z = samples.Z[k];
    const Matrix cz = apply_rows(c[k].transpose(), z);
    const auto f1 = empirical_cf_on(lat, z);
    const auto f2 = empirical_cf_on(lat, cz);
    const JointPlanes joint = joint_empirical_cf_on(lat, half, z, lat, cz);
    std::vector<Complex> g2(G);
    for (std::size_t b = 0; b < G; ++b) g2[b] = second_cf(f2[b]);
    for (std::size_t s = 0; s < half.size(); ++s) {
      const Complex g1 = second_cf(f1[half[s]]);
      for (std::size_t b = 0; b < G; ++b) acc[s * G + b] += second_cf(joint.at(s, b)) - g1 - g2[b];
    }
  }
  LogResidual out{-1.0, {}, {}};
  for (std::size_t s = 0; s < half.size(); ++s)
    for (std::size_t b = 0; b < G; ++b)
      if (std::abs(acc[s * G + b]) > out.max_abs) out = {std::abs(acc[s * G + b]), lat.points[half[s]], lat.points[b]};
  return out;
}

// ---- pipelines -------------------------------------------------------------------

/// Monte-Carlo verification: dependence of (S1, S2), floor and constants at
/// the class level, per-class deficits, covariance and log residuals.
inline BoundReport verify_stability(const GoSystem& system, std::size_t n, std::uint64_t seed, const GridSpec& grid) {
  validate(grid);
  const std::size_t d = system.d();
  const SampleSet s = sample_system(system, n, seed);
  const DependenceEstimate dep = epsilon_T_dependence(s.S1, s.S2, grid.with_dim(d));
  const auto c = system.class_couplings();
  const double tp = t_prime(c, grid.T);
  const double p = cf_floor_p(s, c, tp, grid.points_per_axis);
  BoundReport r = bound_constants(dep.epsilon, d, c.size(), p, tp);
  r.T = grid.T;
  r.epsilon_se = dep.standard_error;

  std::vector<Matrix> qx, qz;
  for (const auto& x : s.X) qx.push_back(sample_covariance(x));
  for (const auto& z : s.Z) qz.push_back(sample_covariance(z));
  r.measured.go_resid = covariance_residuals(system.A(), system.B(), qx).go_max;
  r.measured.cov_resid_lhs = coupled_residual(qz, c);
  for (const auto& z : s.Z) {
    r.measured.class_deficits.push_back(gaussianity_deficit(z, grid));
    r.measured.projection_kolmogorov.push_back(projection_gaussianity(z, Vector::unit(d, 0)).distance);
  }
  r.measured.log_resid_max = log_residual_check(s, c, grid.with_T(tp)).max_abs;
  return r;
}

/// Closed-form verification from the exact c.f.s and covariances.
inline BoundReport verify_stability(const GoSystem& system, const GridSpec& grid) {
  validate(grid);
  const std::size_t d = system.d();
  const double eps = epsilon_T_dependence(system, grid.with_dim(d)).epsilon;
  const auto c = system.class_couplings();
  const double tp = t_prime(c, grid.T);
  const double p = cf_floor_p(system, tp, grid.points_per_axis);
  BoundReport r = bound_constants(eps, d, c.size(), p, tp);
  r.T = grid.T;

  std::vector<Matrix> qx, qz;
  for (const auto& src : system.sources()) qx.push_back(source_covariance(src));
  r.measured.go_resid = covariance_residuals(system.A(), system.B(), qx).go_max;
  for (std::size_t k = 0; k < c.size(); ++k) {
    qz.push_back(covariance_Z(system, k));
    const Vector m = mean_Z(system, k);
    const GridSpec spec = grid.with_dim(d);
    const CFGrid exact = evaluate_cf(spec, [&](const Vector& t) { return cf_Z(system, k, t); });
    const CFGrid gauss = evaluate_cf(spec, [&](const Vector& t) { return gaussian_cf(m, qz.back(), t); });
    r.measured.class_deficits.push_back(cf_sup_distance(exact, gauss).value);
  }
  r.measured.cov_resid_lhs = coupled_residual(qz, c);
  r.measured.log_resid_max = log_residual_check(system, grid.with_T(tp)).max_abs;
  return r;
}

}  // namespace cfstab

#endif  // CFSTAB_BOUNDS_HPP
