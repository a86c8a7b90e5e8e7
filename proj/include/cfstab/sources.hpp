#ifndef CFSTAB_SOURCES_HPP
#define CFSTAB_SOURCES_HPP

// Source-distribution catalog. A vector source draws each coordinate from
// its own law, then applies an optional invertible transform and an optional
// additive isotropic Gaussian component.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cfstab/linalg.hpp"
#include "cfstab/rng.hpp"

namespace cfstab {

using Complex = std::complex<double>;

struct GaussianLaw {
  double mean = 0.0;
  double variance = 1.0;
};
struct UniformLaw {
  double lo = -1.0;
  double hi = 1.0;
};
struct LaplaceLaw {
  double location = 0.0;
  double scale = 1.0;
};
struct RademacherLaw {};
struct GaussianMixtureLaw {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
};

using CoordinateLaw = std::variant<GaussianLaw, UniformLaw, LaplaceLaw, RademacherLaw, GaussianMixtureLaw>;

inline std::string family_name(const CoordinateLaw& law) {
  struct {
    std::string operator()(const GaussianLaw&) const { return "gaussian"; }
    std::string operator()(const UniformLaw&) const { return "uniform"; }
    std::string operator()(const LaplaceLaw&) const { return "laplace"; }
    std::string operator()(const RademacherLaw&) const { return "rademacher"; }
    std::string operator()(const GaussianMixtureLaw&) const { return "gaussian-mixture"; }
  } v;
  return std::visit(v, law);
}

inline void validate(const CoordinateLaw& law) {
  struct {
    void operator()(const GaussianLaw& g) const {
      require(g.variance > 0.0 && std::isfinite(g.variance) && std::isfinite(g.mean), ErrorKind::InvalidArgument,
              "gaussian variance must be positive");
    }
    void operator()(const UniformLaw& u) const {
      require(u.hi > u.lo, ErrorKind::InvalidArgument, "uniform needs lo < hi");
    }
    void operator()(const LaplaceLaw& l) const {
      require(l.scale > 0.0 && std::isfinite(l.location), ErrorKind::InvalidArgument, "laplace scale must be positive");
    }
    void operator()(const RademacherLaw&) const {}
    void operator()(const GaussianMixtureLaw& m) const {
      require(!m.weights.empty() && m.weights.size() == m.means.size() && m.weights.size() == m.variances.size(),
              ErrorKind::InvalidArgument, "mixture components must have matching lengths");
      double total = 0.0;
      for (std::size_t k = 0; k < m.weights.size(); ++k) {
        require(m.weights[k] > 0.0, ErrorKind::InvalidArgument, "mixture weights must be positive");
        require(m.variances[k] > 0.0, ErrorKind::InvalidArgument, "mixture variances must be positive");
        total += m.weights[k];
      }
      require(std::abs(total - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "mixture weights must sum to 1");
    }
  } v;
  std::visit(v, law);
}

inline double law_mean(const CoordinateLaw& law) {
  struct {
    double operator()(const GaussianLaw& g) const { return g.mean; }
    double operator()(const UniformLaw& u) const { return 0.5 * (u.lo + u.hi); }
    double operator()(const LaplaceLaw& l) const { return l.location; }
    double operator()(const RademacherLaw&) const { return 0.0; }
    double operator()(const GaussianMixtureLaw& m) const {
      double s = 0.0;
      for (std::size_t k = 0; k < m.weights.size(); ++k) s += m.weights[k] * m.means[k];
      return s;
    }
  } v;
  return std::visit(v, law);
}

inline double law_variance(const CoordinateLaw& law) {
  struct {
    double operator()(const GaussianLaw& g) const { return g.variance; }
    double operator()(const UniformLaw& u) const { return (u.hi - u.lo) * (u.hi - u.lo) / 12.0; }
    double operator()(const LaplaceLaw& l) const { return 2.0 * l.scale * l.scale; }
    double operator()(const RademacherLaw&) const { return 1.0; }
    double operator()(const GaussianMixtureLaw& m) const {
      double mu = 0.0, second = 0.0;
      for (std::size_t k = 0; k < m.weights.size(); ++k) {
        mu += m.weights[k] * m.means[k];
        second += m.weights[k] * (m.variances[k] + m.means[k] * m.means[k]);
      }
      return second - mu * mu;
    }
  } v;
  return std::visit(v, law);
}

inline double draw(const CoordinateLaw& law, Rng& rng) {
  struct {
    Rng& rng;
    double operator()(const GaussianLaw& g) const { return g.mean + std::sqrt(g.variance) * rng.normal(); }
    double operator()(const UniformLaw& u) const { return rng.uniform(u.lo, u.hi); }
    double operator()(const LaplaceLaw& l) const { return rng.laplace(l.location, l.scale); }
    double operator()(const RademacherLaw&) const { return rng.rademacher(); }
    double operator()(const GaussianMixtureLaw& m) const {
      const double u = rng.uniform01();
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < m.weights.size(); ++k) {
        acc += m.weights[k];
        if (u < acc) break;
      }
      return m.means[k] + std::sqrt(m.variances[k]) * rng.normal();
    }
  } v{rng};
  return std::visit(v, law);
}

/// Closed-form scalar characteristic function of a coordinate law.
inline Complex law_cf(const CoordinateLaw& law, double s) {
  struct {
    double s;
    Complex operator()(const GaussianLaw& g) const {
      return std::exp(Complex(-0.5 * g.variance * s * s, g.mean * s));
    }
    Complex operator()(const UniformLaw& u) const {
      const double half = 0.5 * (u.hi - u.lo);
      const double x = half * s;
      const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
      return std::polar(sinc, 0.5 * (u.lo + u.hi) * s);
    }
    Complex operator()(const LaplaceLaw& l) const {
      return std::polar(1.0 / (1.0 + l.scale * l.scale * s * s), l.location * s);
    }
    Complex operator()(const RademacherLaw&) const { return {std::cos(s), 0.0}; }
    Complex operator()(const GaussianMixtureLaw& m) const {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < m.weights.size(); ++k)
        acc += m.weights[k] * std::exp(Complex(-0.5 * m.variances[k] * s * s, m.means[k] * s));
      return acc;
    }
  } v{s};
  return std::visit(v, law);
}

/// A d-dimensional source vector X = transform * W + sqrt(additive_gaussian) * G,
/// with W having independent coordinates and G standard normal.
struct SourceSpec {
  std::vector<CoordinateLaw> coords;
  std::optional<Matrix> transform;
  double additive_gaussian = 0.0;

  std::size_t dim() const noexcept { return coords.size(); }

  static SourceSpec iid(std::size_t d, const CoordinateLaw& law) {
    return SourceSpec{std::vector<CoordinateLaw>(d, law), std::nullopt, 0.0};
  }
};

inline void validate(const SourceSpec& spec) {
  require(spec.dim() > 0, ErrorKind::InvalidArgument, "source needs at least one coordinate");
  for (const auto& law : spec.coords) validate(law);
  if (spec.transform) {
    require(spec.transform->rows() == spec.dim() && spec.transform->cols() == spec.dim(), ErrorKind::InvalidArgument,
            "source transform must be d x d");
    require(is_invertible(*spec.transform), ErrorKind::SingularMatrix, "source transform is singular");
  }
  require(spec.additive_gaussian >= 0.0, ErrorKind::InvalidArgument, "additive gaussian variance must be >= 0");
}

inline bool is_gaussian(const SourceSpec& spec) {
  for (const auto& law : spec.coords)
    if (!std::holds_alternative<GaussianLaw>(law)) return false;
  return true;
}

inline Vector source_mean(const SourceSpec& spec) {
  Vector m(spec.dim());
  for (std::size_t k = 0; k < spec.dim(); ++k) m[k] = law_mean(spec.coords[k]);
  return spec.transform ? (*spec.transform) * m : m;
}

inline Matrix source_covariance(const SourceSpec& spec) {
  Vector v(spec.dim());
  for (std::size_t k = 0; k < spec.dim(); ++k) v[k] = law_variance(spec.coords[k]);
  Matrix q = Matrix::diagonal(v);
  if (spec.transform) q = (*spec.transform) * q * spec.transform->transpose();
  for (std::size_t k = 0; k < spec.dim(); ++k) q(k, k) += spec.additive_gaussian;
  return q;
}

/// Writes one draw of the source into `out` (length d).
inline void draw_into(const SourceSpec& spec, Rng& rng, std::span<double> out, std::vector<double>& scratch) {
  const std::size_t d = spec.dim();
  scratch.resize(d);
  for (std::size_t k = 0; k < d; ++k) scratch[k] = draw(spec.coords[k], rng);
  if (spec.transform) {
    const Matrix& t = *spec.transform;
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += t(r, c) * scratch[c];
      out[r] = s;
    }
  } else {
    for (std::size_t k = 0; k < d; ++k) out[k] = scratch[k];
  }
  if (spec.additive_gaussian > 0.0) {
    const double sd = std::sqrt(spec.additive_gaussian);
    for (std::size_t k = 0; k < d; ++k) out[k] += sd * rng.normal();
  }
}

/// n x d block of independent draws from `spec` using one RNG stream.
inline Matrix draw_block(const SourceSpec& spec, std::size_t n, Rng& rng) {
  Matrix out(n, spec.dim());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) draw_into(spec, rng, out.row(i), scratch);
  return out;
}

/// Closed-form c.f. E[exp(j t^T X)]; the transform pulls t back to W-coordinates.
inline Complex analytic_cf(const SourceSpec& spec, const Vector& t) {
  require(t.size() == spec.dim(), ErrorKind::InvalidArgument, "analytic_cf dimension mismatch");
  const Vector u = spec.transform ? spec.transform->transpose() * t : t;
  Complex acc = 1.0;
  for (std::size_t k = 0; k < spec.dim(); ++k) acc *= law_cf(spec.coords[k], u[k]);
  if (spec.additive_gaussian > 0.0) acc *= std::exp(-0.5 * spec.additive_gaussian * dot(t, t));
  return acc;
}

}  // namespace cfstab

#endif  // CFSTAB_SOURCES_HPP
