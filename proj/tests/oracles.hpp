#ifndef CFSTAB_TESTS_ORACLES_HPP
#define CFSTAB_TESTS_ORACLES_HPP

// Reference computations that share no code with the library: closed forms,
// dense scans and quadrature. Expected values in the tests come from here.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// Dense scan of sup |f(t)| over [lo, hi] with `points` equally spaced samples.
struct ScanMax {
  double value = 0.0;
  double at = 0.0;
};

inline ScanMax scan_max(const std::function<double(double)>& f, double lo, double hi, int points) {
  ScanMax best{-1.0, lo};
  for (int i = 0; i < points; ++i) {
    const double t = lo + (hi - lo) * i / (points - 1);
    const double v = std::abs(f(t));
    if (v > best.value) best = {v, t};
  }
  return best;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// |cos t - exp(-t^2/2)|: Rademacher against its moment-matched Gaussian.
inline double rademacher_gap(double t) { return std::abs(std::cos(t) - std::exp(-0.5 * t * t)); }

/// Uniform(-a, a) c.f. minus the c.f. of N(0, a^2/3).
inline double uniform_gap(double a, double t) {
  const double u = a * t;
  const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
  return std::abs(sinc - std::exp(-0.5 * t * t * a * a / 3.0));
}

/// sup |F - Phi| for the unit-variance uniform on [-sqrt3, sqrt3], scanned densely.
inline double standardized_uniform_kolmogorov(int points = 2000001) {
  const double a = std::sqrt(3.0);
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -6.0 + 12.0 * i / (points - 1);
    const double f = x < -a ? 0.0 : (x > a ? 1.0 : (x + a) / (2.0 * a));
    best = std::max(best, std::abs(f - std_normal_cdf(x)));
  }
  return best;
}

/// Density of Laplace(0, b) + N(0, s2), written with erfc.
inline double laplace_gauss_density(double x, double b, double s2) {
  const double s = std::sqrt(s2);
  const double base = s2 / (2.0 * b * b);
  const double t1 = std::exp(base - x / b) * std::erfc((s2 / b - x) / (s * std::sqrt(2.0)));
  const double t2 = std::exp(base + x / b) * std::erfc((s2 / b + x) / (s * std::sqrt(2.0)));
  return (t1 + t2) / (4.0 * b);
}

/// Differential entropy of Laplace(0, b) + N(0, s2) by trapezoid quadrature.
inline double laplace_gauss_entropy(double b, double s2) {
  const double half = 40.0 * (b + std::sqrt(s2));
  const int m = 400000;
  const double h = 2.0 * half / m;
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = -half + h * i;
    const double f = laplace_gauss_density(x, b, s2);
    const double term = f > 0.0 ? -f * std::log(f) : 0.0;
    acc += (i == 0 || i == m) ? 0.5 * term : term;
  }
  return acc * h;
}

/// 0.5 ln(2 pi e v) for a scalar Gaussian of variance v.
inline double gaussian_entropy_1d(double v) { return 0.5 * std::log(2.0 * kPi * std::numbers::e * v); }

/// Kolmogorov-bound formula evaluated term by term.
inline double kolm_formula(double eps) {
  return 60.0 / kPi * (2.0 * eps * std::log(1.0 / eps) + eps / std::sqrt(2.0 * kPi) + 2.0 * eps * eps);
}

/// Spearman rank correlation without tie handling (continuous data).
inline double spearman_no_ties(const double* x, const double* y, std::size_t n) {
  auto ranks = [n](const double* v) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

}  // namespace oracle

#endif  // CFSTAB_TESTS_ORACLES_HPP
