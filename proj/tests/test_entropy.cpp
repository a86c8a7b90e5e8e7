#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cfstab/entropy.hpp"
#include "oracles.hpp"

using namespace cfstab;

namespace {

Matrix draw(const SourceSpec& s, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return draw_block(s, n, rng);
}

// Brute-force k-th neighbour distance, squared.
double brute_kth_sq(const Matrix& p, std::size_t q, std::size_t k) {
  std::vector<double> d;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    if (i == q) continue;
    double s = 0.0;
    for (std::size_t m = 0; m < p.cols(); ++m) s += (p(i, m) - p(q, m)) * (p(i, m) - p(q, m));
    d.push_back(s);
  }
  std::nth_element(d.begin(), d.begin() + static_cast<long>(k - 1), d.end());
  return d[k - 1];
}

}  // namespace

TEST(GaussianEntropy, Examples) {
  EXPECT_NEAR(gaussian_entropy(Matrix{{1}}), 1.41894, 1e-5);
  EXPECT_NEAR(gaussian_entropy(Matrix{{1}}), oracle::gaussian_entropy_1d(1.0), 1e-14);
  EXPECT_NEAR(gaussian_entropy(Matrix::identity(2)), 2.0 * oracle::gaussian_entropy_1d(1.0), 1e-14);
  const double a = 0.6;
  const Matrix r{{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}};
  const Matrix dgn{{2, 0}, {0, 0.5}};
  EXPECT_NEAR(gaussian_entropy(r * dgn * r.transpose()), gaussian_entropy(dgn), 1e-13);
}

TEST(GaussianEntropy, SingularRejected) { EXPECT_THROW(gaussian_entropy(Matrix{{1, 1}, {1, 1}}), Error); }

TEST(KdTree, MatchesBruteForce) {
  const Matrix p = draw(SourceSpec::iid(3, LaplaceLaw{}), 2000, 1);
  const KdTree tree(p);
  for (std::size_t q = 0; q < p.rows(); q += 37)
    for (std::size_t k : {1u, 5u, 20u}) EXPECT_DOUBLE_EQ(tree.kth_neighbour_sq(q, k), brute_kth_sq(p, q, k));
}

TEST(KnnEntropy, StandardNormal) {
  const EntropyEstimate h = knn_entropy(draw(SourceSpec::iid(1, GaussianLaw{}), 100000, 2));
  EXPECT_NEAR(h.value, oracle::gaussian_entropy_1d(1.0), 0.05);
  EXPECT_GT(h.standard_error, 0.0);
  EXPECT_LT(h.standard_error, 0.05);
}

TEST(KnnEntropy, UnitUniformIsZero) {
  const EntropyEstimate h = knn_entropy(draw(SourceSpec::iid(1, UniformLaw{0, 1}), 100000, 3));
  EXPECT_NEAR(h.value, 0.0, 0.05);
}

TEST(KnnEntropy, TiesHandled) {
  // Rademacher has massive ties; the jitter keeps every distance positive and the result finite.
  const EntropyEstimate h = knn_entropy(draw(SourceSpec::iid(1, RademacherLaw{}), 1000, 4));
  EXPECT_TRUE(std::isfinite(h.value));
}

TEST(KnnEntropy, ArgumentChecks) {
  const Matrix small = draw(SourceSpec::iid(1, GaussianLaw{}), 99, 5);
  try {
    knn_entropy(small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
  const Matrix ok = draw(SourceSpec::iid(1, GaussianLaw{}), 200, 5);
  EXPECT_THROW(knn_entropy(ok, 0), Error);
  EXPECT_THROW(knn_entropy(ok, 21), Error);
}

TEST(KnnEntropy, Deterministic) {
  const Matrix x = draw(SourceSpec::iid(2, LaplaceLaw{}), 5000, 6);
  const EntropyEstimate a = knn_entropy(x, 5, 9), b = knn_entropy(x, 5, 9);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(EntropyGap, AllGaussianNearZero) {
  const GoSystem sys = kac_bernstein_system(SourceSpec::iid(2, GaussianLaw{0.0, 2.0}));
  for (const auto& g : entropy_gap(sys, 100000, 1)) {
    EXPECT_LT(g.gap, 0.05);
    EXPECT_GE(g.moment_margin_min_eig, -1e-12);
  }
}

TEST(EntropyGap, LaplacePlusGaussianMatchesQuadrature) {
  const double b = 1.0, s2 = 0.5;
  SourceSpec src = SourceSpec::iid(1, LaplaceLaw{0.0, b});
  src.additive_gaussian = s2;
  const double expected = oracle::gaussian_entropy_1d(2 * b * b + s2) - oracle::laplace_gauss_entropy(b, s2);
  EXPECT_GT(expected, 0.0);
  for (const auto& g : entropy_gap(kac_bernstein_system(src), 100000, 2)) EXPECT_NEAR(g.gap, expected, 0.05);
}

TEST(EntropyGap, OracleDecreasesWithGaussianShare) {
  double prev = 1e9;
  for (double s2 : {0.1, 0.5, 1.0, 4.0}) {
    const double gap = oracle::gaussian_entropy_1d(2.0 + s2) - oracle::laplace_gauss_entropy(1.0, s2);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(EntropyGap, QuadratureDensityIntegratesToOne) {
  double acc = 0.0;
  const double h = 1e-3;
  for (int i = -40000; i <= 40000; ++i) acc += oracle::laplace_gauss_density(i * h, 1.0, 0.5) * h;
  EXPECT_NEAR(acc, 1.0, 1e-6);
}

TEST(EntropyGap, NonGaussianWithoutComponentRejected) {
  const GoSystem sys = kac_bernstein_system(SourceSpec::iid(1, LaplaceLaw{}));
  try {
    entropy_gap(sys, 1000, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolated);
  }
}
