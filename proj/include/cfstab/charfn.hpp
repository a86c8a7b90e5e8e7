#ifndef CFSTAB_CHARFN_HPP
#define CFSTAB_CHARFN_HPP

// Characteristic functions: empirical, Gaussian and closed-form, the second
// c.f., and evaluation on lattices inside a 1-norm ball.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <utility>
#include <vector>

#include "cfstab/linalg.hpp"
#include "cfstab/sources.hpp"
#include "cfstab/stats.hpp"

namespace cfstab {

inline constexpr int kDefaultPointsPerAxis = 41;
inline constexpr double kDefaultGridT = 3.0;
inline constexpr double kModulusFloor = 1e-6;

/// Axis-aligned lattice over [-T, T]^dim restricted to the 1-norm ball of radius T.
struct GridSpec {
  double T = kDefaultGridT;
  int points_per_axis = kDefaultPointsPerAxis;
  std::size_t dim = 1;

  int half_width() const noexcept { return (points_per_axis - 1) / 2; }
  double step() const noexcept { return T / half_width(); }
  GridSpec with_dim(std::size_t d) const { return GridSpec{T, points_per_axis, d}; }
  GridSpec with_T(double t) const { return GridSpec{t, points_per_axis, dim}; }
  /// Halves the lattice step; the coarse lattice stays a subset of the fine one.
  GridSpec refined() const { return GridSpec{T, 2 * points_per_axis - 1, dim}; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline void validate(const GridSpec& g) {
  require(g.T > 0.0 && std::isfinite(g.T), ErrorKind::InvalidArgument, "grid radius T must be positive");
  require(g.points_per_axis >= 3 && g.points_per_axis % 2 == 1, ErrorKind::InvalidArgument,
          "points_per_axis must be odd and >= 3");
  require(g.dim >= 1, ErrorKind::InvalidArgument, "grid dimension must be >= 1");
}

/// Enumerated lattice points with their integer indices (t = index * step).
struct Lattice {
  GridSpec spec;
  std::vector<std::vector<int>> index;
  std::vector<Vector> points;

  std::size_t size() const noexcept { return points.size(); }
};

inline Lattice make_lattice(const GridSpec& spec) {
  validate(spec);
  const int K = spec.half_width();
  Lattice lat{spec, {}, {}};
  std::vector<int> k(spec.dim, -K);
  while (true) {
    int l1 = 0;
    for (int v : k) l1 += std::abs(v);
    if (l1 <= K) {
      Vector t(spec.dim);
      for (std::size_t m = 0; m < spec.dim; ++m) t[m] = static_cast<double>(k[m]) * spec.T / K;
      lat.index.push_back(k);
      lat.points.push_back(std::move(t));
    }
    std::size_t m = spec.dim;
    while (m > 0) {
      --m;
      if (k[m] < K) {
        ++k[m];
        break;
      }
      k[m] = -K;
      if (m == 0) return lat;
    }
  }
}

/// Index of the origin within a lattice.
inline std::size_t origin_index(const Lattice& lat) {
  for (std::size_t g = 0; g < lat.size(); ++g) {
    bool zero = true;
    for (int v : lat.index[g]) zero = zero && v == 0;
    if (zero) return g;
  }
  fail(ErrorKind::Internal, "lattice without origin");
}

/// Lattice points whose first nonzero index is positive, plus the origin. The
/// remaining points are negatives of these.
inline bool in_half_space(const std::vector<int>& k) {
  for (int v : k)
    if (v != 0) return v > 0;
  return true;
}

/// exp(j t_g^T x_i) for a chunk of sample rows against a lattice, stored as
/// separate real and imaginary planes of shape rows x lattice-size.
class PhaseTable {
 public:
  PhaseTable(const Lattice& lat, std::vector<std::size_t> subset = {})
      : lat_(&lat), subset_(std::move(subset)) {
    if (subset_.empty()) {
      subset_.resize(lat.size());
      for (std::size_t g = 0; g < lat.size(); ++g) subset_[g] = g;
    }
  }

  std::size_t width() const noexcept { return subset_.size(); }
  const std::vector<std::size_t>& subset() const noexcept { return subset_; }

  /// Fills the planes for rows [first, first + count) of `block`, columns [col, col + dim).
  void fill(const Matrix& block, std::size_t first, std::size_t count, std::size_t col = 0) {
    const std::size_t d = lat_->spec.dim;
    const int K = lat_->spec.half_width();
    const double h = lat_->spec.step();
    const std::size_t G = subset_.size();
    const std::size_t P = static_cast<std::size_t>(2 * K + 1);
    re_.resize(count * G);
    im_.resize(count * G);
    pow_re_.resize(d * P);
    pow_im_.resize(d * P);
    for (std::size_t i = 0; i < count; ++i) {
      auto x = block.row(first + i);
      for (std::size_t m = 0; m < d; ++m) {
        const double base_re = std::cos(h * x[col + m]);
        const double base_im = std::sin(h * x[col + m]);
        double* pr = &pow_re_[m * P + K];
        double* pi = &pow_im_[m * P + K];
        pr[0] = 1.0;
        pi[0] = 0.0;
        for (int k = 1; k <= K; ++k) {
          pr[k] = pr[k - 1] * base_re - pi[k - 1] * base_im;
          pi[k] = pr[k - 1] * base_im + pi[k - 1] * base_re;
          pr[-k] = pr[k];
          pi[-k] = -pi[k];
        }
      }
      double* out_re = &re_[i * G];
      double* out_im = &im_[i * G];
      for (std::size_t s = 0; s < G; ++s) {
        const auto& k = lat_->index[subset_[s]];
        double r = pow_re_[static_cast<std::size_t>(k[0] + K)];
        double q = pow_im_[static_cast<std::size_t>(k[0] + K)];
        for (std::size_t m = 1; m < d; ++m) {
          if (k[m] == 0) continue;
          const double br = pow_re_[m * P + static_cast<std::size_t>(k[m] + K)];
          const double bi = pow_im_[m * P + static_cast<std::size_t>(k[m] + K)];
          const double nr = r * br - q * bi;
          q = r * bi + q * br;
          r = nr;
        }
        out_re[s] = r;
        out_im[s] = q;
      }
    }
  }

  const double* re(std::size_t row) const { return &re_[row * subset_.size()]; }
  const double* im(std::size_t row) const { return &im_[row * subset_.size()]; }

 private:
  const Lattice* lat_;
  std::vector<std::size_t> subset_;
  std::vector<double> re_, im_, pow_re_, pow_im_;
};

inline constexpr std::size_t kChunkRows = 256;

/// Empirical c.f. of the rows of `block` (columns [col, col + dim)) at every lattice point.
inline std::vector<Complex> empirical_cf_on(const Lattice& lat, const Matrix& block, std::size_t col = 0) {
  require(block.rows() > 0, ErrorKind::InvalidArgument, "empty sample block");
  require(col + lat.spec.dim <= block.cols(), ErrorKind::InvalidArgument, "lattice dimension exceeds block");
  const std::size_t G = lat.size();
  std::vector<double> tot_re(G, 0.0), tot_im(G, 0.0), acc_re(G), acc_im(G);
  PhaseTable table(lat);
  for (std::size_t first = 0; first < block.rows(); first += kChunkRows) {
    const std::size_t count = std::min(kChunkRows, block.rows() - first);
    table.fill(block, first, count, col);
    std::fill(acc_re.begin(), acc_re.end(), 0.0);
    std::fill(acc_im.begin(), acc_im.end(), 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      const double* r = table.re(i);
      const double* q = table.im(i);
      for (std::size_t g = 0; g < G; ++g) {
        acc_re[g] += r[g];
        acc_im[g] += q[g];
      }
    }
    for (std::size_t g = 0; g < G; ++g) {
      tot_re[g] += acc_re[g];
      tot_im[g] += acc_im[g];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(block.rows());
  std::vector<Complex> out(G);
  for (std::size_t g = 0; g < G; ++g) out[g] = {tot_re[g] * inv_n, tot_im[g] * inv_n};
  return out;
}

/// Joint empirical c.f. E[exp(j (t1^T x + t2^T y))] for row-aligned blocks at
/// every pair (lat1[subset1[s]], lat2[g]); returned row-major as re/im planes of
/// shape |subset1| x |lat2|, each entry divided by n.
struct JointPlanes {
  std::size_t rows = 0, cols = 0;
  std::vector<double> re, im;

  Complex at(std::size_t s, std::size_t g) const { return {re[s * cols + g], im[s * cols + g]}; }
};

inline JointPlanes joint_empirical_cf_on(const Lattice& lat1, const std::vector<std::size_t>& subset1,
                                         const Matrix& x, const Lattice& lat2, const Matrix& y) {
  require(x.rows() == y.rows(), ErrorKind::InvalidArgument, "joint c.f. blocks must be row-aligned");
  require(x.rows() > 0, ErrorKind::InvalidArgument, "empty sample block");
  const std::size_t n = x.rows();
  PhaseTable ta(lat1, subset1), tb(lat2);
  const std::size_t H = ta.width(), G2 = tb.width();
  JointPlanes out{H, G2, std::vector<double>(H * G2, 0.0), std::vector<double>(H * G2, 0.0)};
  for (std::size_t first = 0; first < n; first += kChunkRows) {
    const std::size_t count = std::min(kChunkRows, n - first);
    ta.fill(x, first, count);
    tb.fill(y, first, count);
    for (std::size_t i = 0; i < count; ++i) {
      const double* ar = ta.re(i);
      const double* ai = ta.im(i);
      const double* br = tb.re(i);
      const double* bi = tb.im(i);
      for (std::size_t s = 0; s < H; ++s) {
        const double pr = ar[s], pi = ai[s];
        double* __restrict rr = &out.re[s * G2];
        double* __restrict ri = &out.im[s * G2];
        for (std::size_t g = 0; g < G2; ++g) {
          rr[g] += pr * br[g] - pi * bi[g];
          ri[g] += pr * bi[g] + pi * br[g];
        }
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : out.re) v *= inv_n;
  for (auto& v : out.im) v *= inv_n;
  return out;
}

/// Indices of the lattice points in the closed half space (see in_half_space).
inline std::vector<std::size_t> half_space_subset(const Lattice& lat) {
  std::vector<std::size_t> half;
  for (std::size_t g = 0; g < lat.size(); ++g)
    if (in_half_space(lat.index[g])) half.push_back(g);
  return half;
}

/// (1/n) sum_i exp(j t^T x_i), exactly 1 at t = 0.
inline Complex empirical_cf(const Matrix& samples, const Vector& t) {
  require(samples.cols() == t.size(), ErrorKind::InvalidArgument, "empirical_cf dimension mismatch");
  require(samples.rows() > 0, ErrorKind::InvalidArgument, "empty sample block");
  const std::size_t n = samples.rows();
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = samples.row(i);
    double phase = 0.0;
    for (std::size_t m = 0; m < t.size(); ++m) phase += t[m] * x[m];
    re[i] = std::cos(phase);
    im[i] = std::sin(phase);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return {pairwise_sum(re) * inv_n, pairwise_sum(im) * inv_n};
}

/// exp(j t^T m - t^T Q t / 2).
inline Complex gaussian_cf(const Vector& mean, const Matrix& cov, const Vector& t) {
  require(mean.size() == t.size() && cov.rows() == t.size() && cov.cols() == t.size(), ErrorKind::InvalidArgument,
          "gaussian_cf dimension mismatch");
  if (!is_symmetric(cov)) fail(ErrorKind::NotSymmetric, "gaussian_cf covariance is not symmetric");
  return std::exp(Complex(-0.5 * dot(t, cov * t), dot(t, mean)));
}

/// Principal-branch logarithm of a c.f. value.
inline Complex second_cf(Complex value, double floor = kModulusFloor) {
  if (!(std::abs(value) >= floor))
    fail(ErrorKind::ModulusTooSmall, "|f| = " + std::to_string(std::abs(value)) + " is below the modulus floor");
  return std::log(value);
}

/// C.f. values cached on a lattice.
struct CFGrid {
  GridSpec spec;
  std::vector<Vector> points;
  std::vector<Complex> values;
};

inline CFGrid evaluate_cf(const GridSpec& spec, const std::function<Complex(const Vector&)>& f) {
  Lattice lat = make_lattice(spec);
  CFGrid out{spec, std::move(lat.points), {}};
  out.values.reserve(out.points.size());
  for (const auto& t : out.points) out.values.push_back(f(t));
  return out;
}

inline CFGrid evaluate_empirical_cf(const GridSpec& spec, const Matrix& samples) {
  require(samples.cols() == spec.dim, ErrorKind::InvalidArgument, "grid dimension differs from sample dimension");
  Lattice lat = make_lattice(spec);
  auto values = empirical_cf_on(lat, samples);
  return CFGrid{spec, std::move(lat.points), std::move(values)};
}

struct SupResult {
  double value = 0.0;
  Vector at;
};

/// max over the grid of |a - b| and where it occurs (first maximizer in lattice order).
inline SupResult cf_sup_distance(const CFGrid& a, const CFGrid& b) {
  if (!(a.spec == b.spec) || a.values.size() != b.values.size())
    fail(ErrorKind::GridMismatch, "c.f. grids were built from different specs");
  SupResult r{-1.0, {}};
  for (std::size_t g = 0; g < a.values.size(); ++g) {
    const double diff = std::abs(a.values[g] - b.values[g]);
    if (diff > r.value) {
      r.value = diff;
      r.at = a.points[g];
    }
  }
  return r;
}

/// Grid sup of |f - phi| with phi the Gaussian c.f. sharing the sample mean and covariance.
inline SupResult gaussianity_deficit_at(const Matrix& samples, const GridSpec& grid) {
  const GridSpec spec = grid.with_dim(samples.cols());
  const Vector m = column_means(samples);
  const Matrix q = sample_covariance(samples);
  const CFGrid emp = evaluate_empirical_cf(spec, samples);
  const CFGrid gauss = evaluate_cf(spec, [&](const Vector& t) { return gaussian_cf(m, q, t); });
  return cf_sup_distance(emp, gauss);
}

inline double gaussianity_deficit(const Matrix& samples, const GridSpec& grid) {
  return gaussianity_deficit_at(samples, grid).value;
}

/// Closed-form variant: distance from the source c.f. to its moment-matched Gaussian.
inline SupResult gaussianity_deficit_at(const SourceSpec& source, const GridSpec& grid) {
  const GridSpec spec = grid.with_dim(source.dim());
  const Vector m = source_mean(source);
  const Matrix q = source_covariance(source);
  const CFGrid exact = evaluate_cf(spec, [&](const Vector& t) { return analytic_cf(source, t); });
  const CFGrid gauss = evaluate_cf(spec, [&](const Vector& t) { return gaussian_cf(m, q, t); });
  return cf_sup_distance(exact, gauss);
}

inline double gaussianity_deficit(const SourceSpec& source, const GridSpec& grid) {
  return gaussianity_deficit_at(source, grid).value;
}

/// Deficit of a scalar coordinate law.
inline double gaussianity_deficit(const CoordinateLaw& law, const GridSpec& grid) {
  return gaussianity_deficit(SourceSpec::iid(1, law), grid);
}

}  // namespace cfstab

#endif  // CFSTAB_CHARFN_HPP
