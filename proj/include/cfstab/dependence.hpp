#ifndef CFSTAB_DEPENDENCE_HPP
#define CFSTAB_DEPENDENCE_HPP

// (epsilon, T)-dependence: sup over ||t1||_1 <= T, ||t2||_1 <= T of
// |f_{X,Y}(t1, t2) - f_X(t1) f_Y(t2)|, restricted to lattice points.

#include <cmath>
#include <functional>
#include <vector>

#include "cfstab/charfn.hpp"
#include "cfstab/models.hpp"

namespace cfstab {

struct DependenceEstimate {
  double epsilon = 0.0;
  double T = 0.0;
  Vector argmax_t1;
  Vector argmax_t2;
  GridSpec grid;
  std::size_t n = 0;             // 0 for closed-form evaluation
  double standard_error = 0.0;   // delta-method s.e. of the statistic at the maximizer
};

/// Columns `cols` of an n x d block.
inline Matrix select_columns(const Matrix& block, const std::vector<std::size_t>& cols) {
  Matrix out(block.rows(), cols.size());
  for (std::size_t i = 0; i < block.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = block(i, cols[j]);
  return out;
}

namespace detail {

inline double dependence_standard_error(const Matrix& x, const Matrix& y, const Vector& t1, const Vector& t2) {
  const std::size_t n = x.rows();
  if (n < 2) return 0.0;
  std::vector<Complex> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 0.0, q = 0.0;
    for (std::size_t m = 0; m < t1.size(); ++m) p += t1[m] * x(i, m);
    for (std::size_t m = 0; m < t2.size(); ++m) q += t2[m] * y(i, m);
    a[i] = {std::cos(p), std::sin(p)};
    b[i] = {std::cos(q), std::sin(q)};
  }
  Complex fa = 0.0, fb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fa += a[i];
    fb += b[i];
  }
  fa /= static_cast<double>(n);
  fb /= static_cast<double>(n);
  // Influence terms of J - F1 F2 linearized around the sample means.
  std::vector<Complex> w(n);
  Complex wbar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = a[i] * b[i] - a[i] * fb - fa * b[i];
    wbar += w[i];
  }
  wbar /= static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::norm(w[i] - wbar);
  return std::sqrt(pairwise_sum(dev) / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace detail

/// Empirical statistic for row-aligned blocks (row i of x pairs with row i of y).
inline DependenceEstimate epsilon_T_dependence(const Matrix& x, const Matrix& y, const GridSpec& grid) {
  require(x.rows() == y.rows(), ErrorKind::InvalidArgument, "dependence blocks must be row-aligned");
  require(x.rows() > 0, ErrorKind::InvalidArgument, "empty sample blocks");
  const Lattice lat1 = make_lattice(grid.with_dim(x.cols()));
  const Lattice lat2 = make_lattice(grid.with_dim(y.cols()));
  const auto f1 = empirical_cf_on(lat1, x);
  const auto f2 = empirical_cf_on(lat2, y);

  // Only half of the t1 lattice is needed: the statistic at (-t1, -t2) is the
  // modulus of the conjugate of its value at (t1, t2).
  const std::vector<std::size_t> half = half_space_subset(lat1);
  const JointPlanes joint = joint_empirical_cf_on(lat1, half, x, lat2, y);
  const std::size_t H = half.size(), G2 = lat2.size(), n = x.rows();

  DependenceEstimate est;
  est.T = grid.T;
  est.grid = grid;
  est.n = n;
  double best = -1.0;
  std::size_t best_s = 0, best_g = 0;
  for (std::size_t s = 0; s < H; ++s)
    for (std::size_t g = 0; g < G2; ++g) {
      const double diff = std::abs(joint.at(s, g) - f1[half[s]] * f2[g]);
      if (diff > best) {
        best = diff;
        best_s = s;
        best_g = g;
      }
    }
  est.epsilon = best;
  est.argmax_t1 = lat1.points[half[best_s]];
  est.argmax_t2 = lat2.points[best_g];
  est.standard_error = detail::dependence_standard_error(x, y, est.argmax_t1, est.argmax_t2);
  return est;
}

using JointCf = std::function<Complex(const Vector&, const Vector&)>;
using MarginalCf = std::function<Complex(const Vector&)>;

/// Closed-form statistic from a joint c.f. and its two marginals.
inline DependenceEstimate epsilon_T_dependence(const JointCf& joint, const MarginalCf& f1, const MarginalCf& f2,
                                               std::size_t d1, std::size_t d2, const GridSpec& grid) {
  const Lattice lat1 = make_lattice(grid.with_dim(d1));
  const Lattice lat2 = make_lattice(grid.with_dim(d2));
  std::vector<Complex> v1, v2;
  for (const auto& t : lat1.points) v1.push_back(f1(t));
  for (const auto& t : lat2.points) v2.push_back(f2(t));
  DependenceEstimate est;
  est.T = grid.T;
  est.grid = grid;
  double best = -1.0;
  for (std::size_t a = 0; a < lat1.size(); ++a) {
    if (!in_half_space(lat1.index[a])) continue;
    for (std::size_t b = 0; b < lat2.size(); ++b) {
      const double diff = std::abs(joint(lat1.points[a], lat2.points[b]) - v1[a] * v2[b]);
      if (diff > best) {
        best = diff;
        est.argmax_t1 = lat1.points[a];
        est.argmax_t2 = lat2.points[b];
      }
    }
  }
  est.epsilon = best;
  return est;
}

/// Closed-form dependence of (S1, S2) for a system.
inline DependenceEstimate epsilon_T_dependence(const GoSystem& system, const GridSpec& grid) {
  const std::size_t d = system.d();
  const Vector zero(d);
  return epsilon_T_dependence([&](const Vector& t1, const Vector& t2) { return joint_cf_S(system, t1, t2); },
                              [&](const Vector& t1) { return joint_cf_S(system, t1, zero); },
                              [&](const Vector& t2) { return joint_cf_S(system, zero, t2); }, d, d, grid);
}

/// Symmetric d x d matrix of pairwise statistics between coordinate columns.
inline Matrix pairwise_dependence_matrix(const Matrix& samples, const GridSpec& grid) {
  const std::size_t d = samples.cols();
  require(d >= 2, ErrorKind::InvalidArgument, "pairwise dependence needs d >= 2");
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = i + 1; k < d; ++k) {
      const double e =
          epsilon_T_dependence(select_columns(samples, {i}), select_columns(samples, {k}), grid.with_dim(1)).epsilon;
      out(i, k) = out(k, i) = e;
    }
  return out;
}

inline constexpr std::size_t kMaxMutualDim = 8;

struct MutualDependence {
  double epsilon = 0.0;
  std::vector<std::size_t> group;  // the maximizing side that contains coordinate 0
};

/// Max of the statistic over the 2^(d-1) - 1 bipartitions of the coordinates.
inline MutualDependence mutual_dependence_detail(const Matrix& samples, const GridSpec& grid) {
  const std::size_t d = samples.cols();
  require(d >= 2, ErrorKind::InvalidArgument, "mutual dependence needs d >= 2");
  if (d > kMaxMutualDim) fail(ErrorKind::DimensionTooLarge, "mutual dependence supports d <= 8");
  MutualDependence best{-1.0, {}};
  const std::size_t masks = std::size_t{1} << (d - 1);
  // Bit m of `mask` places coordinate m + 1 with coordinate 0.
  for (std::size_t mask = 0; mask + 1 < masks; ++mask) {
    std::vector<std::size_t> left{0}, right;
    for (std::size_t m = 1; m < d; ++m) ((mask >> (m - 1)) & 1 ? left : right).push_back(m);
    const double e =
        epsilon_T_dependence(select_columns(samples, left), select_columns(samples, right), grid).epsilon;
    if (e > best.epsilon) best = {e, left};
  }
  return best;
}

inline double mutual_dependence(const Matrix& samples, const GridSpec& grid) {
  return mutual_dependence_detail(samples, grid).epsilon;
}

}  // namespace cfstab

#endif  // CFSTAB_DEPENDENCE_HPP
