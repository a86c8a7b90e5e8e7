#ifndef CFSTAB_STATS_HPP
#define CFSTAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "cfstab/linalg.hpp"

namespace cfstab {

/// Pairwise (cascade) summation in a fixed order.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 64) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double mean(std::span<const double> x) {
  require(!x.empty(), ErrorKind::InvalidArgument, "mean of an empty sequence");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

/// Sample variance with the n - 1 denominator (0 for a single value).
inline double variance(std::span<const double> x) {
  const double m = mean(x);
  if (x.size() < 2) return 0.0;
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - m) * (x[i] - m);
  return pairwise_sum(sq) / static_cast<double>(x.size() - 1);
}

inline double median(std::vector<double> x) {
  require(!x.empty(), ErrorKind::InvalidArgument, "median of an empty sequence");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + mid);
  return 0.5 * (lower + upper);
}

inline Vector column_means(const Matrix& block) {
  require(block.rows() > 0, ErrorKind::InvalidArgument, "empty sample block");
  Vector m(block.cols());
  std::vector<double> col(block.rows());
  for (std::size_t j = 0; j < block.cols(); ++j) {
    for (std::size_t i = 0; i < block.rows(); ++i) col[i] = block(i, j);
    m[j] = mean(col);
  }
  return m;
}

/// Sample covariance (n - 1 denominator) of the rows of an n x d block.
inline Matrix sample_covariance(const Matrix& block) {
  const std::size_t n = block.rows(), d = block.cols();
  require(n >= 2, ErrorKind::InvalidArgument, "covariance needs at least two samples");
  const Vector m = column_means(block);
  Matrix q(d, d);
  std::vector<double> prod(n);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      for (std::size_t i = 0; i < n; ++i) prod[i] = (block(i, a) - m[a]) * (block(i, b) - m[b]);
      q(a, b) = q(b, a) = pairwise_sum(prod) / static_cast<double>(n - 1);
    }
  return q;
}

/// E[x x^T] estimated by the sample average.
inline Matrix second_moment(const Matrix& block) {
  const std::size_t n = block.rows(), d = block.cols();
  Matrix q(d, d);
  std::vector<double> prod(n);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      for (std::size_t i = 0; i < n; ++i) prod[i] = block(i, a) * block(i, b);
      q(a, b) = q(b, a) = pairwise_sum(prod) / static_cast<double>(n);
    }
  return q;
}

/// Ranks starting at 1, ties receive their average rank.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
    i = j + 1;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument, "pearson needs equal lengths >= 2");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace cfstab

#endif  // CFSTAB_STATS_HPP
