#ifndef CFSTAB_ENTROPY_HPP
#define CFSTAB_ENTROPY_HPP

// Differential entropy: Gaussian closed form, Kozachenko-Leonenko k-NN
// estimate, and per-class gaps between the two for sampled systems.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "cfstab/kdtree.hpp"
#include "cfstab/linalg.hpp"
#include "cfstab/models.hpp"
#include "cfstab/rng.hpp"
#include "cfstab/stats.hpp"

namespace cfstab {

inline constexpr std::size_t kDefaultNeighbours = 5;
inline constexpr std::size_t kMinEntropySamples = 100;
inline constexpr std::size_t kMaxNeighbours = 20;
inline constexpr std::size_t kBootstrapResamples = 50;
inline constexpr double kTieJitter = 1e-12;

/// 0.5 (d ln(2 pi e) + ln det Q).
inline double gaussian_entropy(const Matrix& q) {
  const SymEigen e = sym_eigen(q);
  double logdet = 0.0;
  for (double lam : e.eigenvalues.values()) {
    if (!(lam > kMinEigenvalue)) fail(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
    logdet += std::log(lam);
  }
  const double d = static_cast<double>(q.rows());
  return 0.5 * (d * std::log(2.0 * std::numbers::pi * std::numbers::e) + logdet);
}

struct EntropyEstimate {
  double value = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  double standard_error = 0.0;
};

namespace detail {

/// Moves exact duplicate rows apart by a relative 1e-12 deterministic jitter.
inline Matrix jitter_ties(const Matrix& samples) {
  const std::size_t n = samples.rows(), d = samples.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(samples.row(a).begin(), samples.row(a).end(), samples.row(b).begin(),
                                        samples.row(b).end());
  };
  std::sort(order.begin(), order.end(), row_less);
  Matrix out = samples;
  Rng rng(0, streams::kBootstrap);
  for (std::size_t i = 1; i < n; ++i) {
    if (row_less(order[i - 1], order[i])) continue;
    for (std::size_t m = 0; m < d; ++m) {
      const double x = samples(order[i], m);
      out(order[i], m) = x + kTieJitter * std::max(1.0, std::abs(x)) * rng.uniform(-1.0, 1.0);
    }
  }
  return out;
}

inline double log_unit_ball_volume(std::size_t d) {
  const double dd = static_cast<double>(d);
  return 0.5 * dd * std::log(std::numbers::pi) - std::lgamma(0.5 * dd + 1.0);
}

}  // namespace detail

/// H = psi(n) - psi(k) + ln V_d + (d/n) sum_i ln rho_i, with rho_i the distance
/// from row i to its k-th nearest neighbour. The standard error bootstraps the
/// per-row log-distance terms.
inline EntropyEstimate knn_entropy(const Matrix& samples, std::size_t k = kDefaultNeighbours,
                                   std::uint64_t bootstrap_seed = 0) {
  const std::size_t n = samples.rows(), d = samples.cols();
  if (n < kMinEntropySamples) fail(ErrorKind::TooFewSamples, "k-NN entropy needs at least 100 samples");
  require(k >= 1 && k <= kMaxNeighbours, ErrorKind::InvalidArgument, "k must lie in [1, 20]");
  require(d >= 1, ErrorKind::InvalidArgument, "samples need at least one column");
  const Matrix pts = detail::jitter_ties(samples);
  const KdTree tree(pts);
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i] = 0.5 * std::log(tree.kth_neighbour_sq(i, k));

  const double dd = static_cast<double>(d);
  const double offset = boost::math::digamma(static_cast<double>(n)) - boost::math::digamma(static_cast<double>(k)) +
                        detail::log_unit_ball_volume(d);
  EntropyEstimate est;
  est.k = k;
  est.n = n;
  est.value = offset + dd * mean(logs);

  Rng rng(bootstrap_seed, streams::kBootstrap);
  std::vector<double> boot(kBootstrapResamples), draw(n);
  for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) draw[i] = logs[rng.below(n)];
    boot[b] = offset + dd * mean(draw);
  }
  est.standard_error = std::sqrt(variance(boot));
  return est;
}

struct EntropyGap {
  std::size_t class_id = 0;
  double knn = 0.0;
  double gaussian = 0.0;
  double gap = 0.0;
  double standard_error = 0.0;
  double moment_margin_min_eig = 0.0;  // min eigenvalue of E[Z Z^T] - Qhat, margin 0
};

/// Per class, |h_knn(Z) - h(N(., Qhat))| with Qhat the sample covariance of Z.
inline std::vector<EntropyGap> entropy_gap(const GoSystem& system, std::size_t n, std::uint64_t seed,
                                           std::size_t k = kDefaultNeighbours) {
  for (std::size_t l = 0; l < system.L(); ++l) {
    const auto& src = system.sources()[l];
    if (!is_gaussian(src) && !(src.additive_gaussian > 0.0))
      fail(ErrorKind::HypothesisViolated,
           "source " + std::to_string(l + 1) + " lacks a non-degenerate additive Gaussian component");
  }
  const SampleSet s = sample_system(system, n, seed);
  std::vector<EntropyGap> out;
  for (std::size_t c = 0; c < s.Z.size(); ++c) {
    const Matrix q = sample_covariance(s.Z[c]);
    EntropyGap g;
    g.class_id = c;
    const EntropyEstimate h = knn_entropy(s.Z[c], k, seed);
    g.knn = h.value;
    g.standard_error = h.standard_error;
    g.gaussian = gaussian_entropy(q);
    g.gap = std::abs(g.knn - g.gaussian);
    // E[Z Z^T] minus the (1/n-normalized) covariance is the mean outer product.
    const double shrink = static_cast<double>(n - 1) / static_cast<double>(n);
    g.moment_margin_min_eig = sym_eigen(second_moment(s.Z[c]) - shrink * q).eigenvalues.values().back();
    out.push_back(g);
  }
  return out;
}

}  // namespace cfstab

#endif  // CFSTAB_ENTROPY_HPP
