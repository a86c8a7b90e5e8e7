#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cfstab/bss.hpp"

using namespace cfstab;

namespace {

Matrix rotation(double a) { return Matrix{{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}}; }

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

const std::vector<CoordinateLaw> kLaplaceUniform = {LaplaceLaw{}, UniformLaw{}};

}  // namespace

TEST(Mix, IdentityCopiesSources) {
  const MixedSamples m = mix(MixingModel(Matrix::identity(2), kLaplaceUniform), 100, 1);
  EXPECT_EQ(m.S.entries(), m.Z.entries());
}

TEST(Mix, DiagonalVariances) {
  const std::vector<CoordinateLaw> unit = {GaussianLaw{}, UniformLaw{-std::sqrt(3.0), std::sqrt(3.0)}};
  const std::size_t n = 100000;
  const MixedSamples m = mix(MixingModel(Matrix{{2, 0}, {0, 3}}, unit), n, 2);
  const Matrix q = sample_covariance(m.Z);
  // s.e. of a sample variance is about sigma^2 sqrt((kurt - 1) / n)
  EXPECT_NEAR(q(0, 0), 4.0, 5 * 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(q(1, 1), 9.0, 5 * 9.0 * std::sqrt(0.8 / n));
}

TEST(Mix, CovarianceMatchesModel) {
  const MixingModel model(Matrix{{1, 0.5}, {-0.3, 2}}, kLaplaceUniform);
  const MixedSamples m = mix(model, 200000, 3);
  EXPECT_LT(max_abs_diff(sample_covariance(m.Z), model.covariance()), 0.05);
}

TEST(Mix, NonzeroMeanRejected) {
  EXPECT_THROW(MixingModel(Matrix::identity(2), {GaussianLaw{1.0, 1.0}, UniformLaw{}}), Error);
}

TEST(Whiten, OrthogonalMixingOfWhiteSourcesIsNoOp) {
  const std::vector<CoordinateLaw> unit = {LaplaceLaw{0, 1 / std::sqrt(2.0)}, RademacherLaw{}};
  const MixingModel model(rotation(0.4), unit);
  const MixedSamples m = mix(model, 100, 4);
  const Whitened w = whiten(m.Z, model.covariance());
  EXPECT_LT(max_abs_diff(w.W, m.Z), 1e-12);
}

TEST(Whiten, ExactModeCovarianceNearIdentity) {
  const MixingModel model(Matrix{{2, 1}, {1, 3}}, kLaplaceUniform);
  const std::size_t n = 100000;
  const Whitened w = whiten(mix(model, n, 5).Z, model.covariance());
  EXPECT_LT(max_abs_diff(sample_covariance(w.W), Matrix::identity(2)), 5 * std::sqrt(6.0 / n));
}

TEST(Whiten, EmpiricalModeCovarianceIdentity) {
  const MixingModel model(Matrix{{2, 1}, {1, 3}}, kLaplaceUniform);
  const Whitened w = whiten(mix(model, 100000, 6).Z);
  EXPECT_LT(max_abs_diff(sample_covariance(w.W), Matrix::identity(2)), 0.05);
}

TEST(ExtractOrthogonal, NormalizedSourcesGiveIdentity) {
  const Matrix ds{{4, 0}, {0, 9}};
  const Matrix v = extract_orthogonal(Matrix{{0.5, 0}, {0, 1.0 / 3.0}}, Matrix::identity(2), ds);
  EXPECT_LT(max_abs_diff(v, Matrix::identity(2)), 1e-15);
}

TEST(ExtractOrthogonal, RotationRecovered) {
  const Matrix ds{{4, 0}, {0, 9}};
  const Matrix r = rotation(0.7);
  const Matrix v = extract_orthogonal(r * Matrix{{0.5, 0}, {0, 1.0 / 3.0}}, Matrix::identity(2), ds);
  EXPECT_LT(max_abs_diff(v, r), 1e-15);
}

TEST(ExtractOrthogonal, CorrelatedOutputRejected) {
  EXPECT_EQ(kind_of([] { extract_orthogonal(Matrix{{1, 1}, {0, 1}}, Matrix::identity(2), Matrix::identity(2)); }),
            ErrorKind::NotOrthogonal);
}

TEST(Recover, IdentityIsNoOp) {
  const Matrix w{{1, 2}, {3, 4}};
  EXPECT_EQ(recover(w, Matrix::identity(2)).entries(), w.entries());
}

TEST(Recover, ExactPipelineMatchesNormalizedSources) {
  const std::vector<CoordinateLaw> laws = {LaplaceLaw{0, 1 / std::sqrt(2.0)}, UniformLaw{-2 * std::sqrt(3.0), 2 * std::sqrt(3.0)}};
  const MixingModel model(Matrix{{2, 1}, {1, 3}}, laws);
  ASSERT_NEAR(model.D_S()(1, 1), 4.0, 1e-12);
  const MixedSamples m = mix(model, 5000, 7);
  const Whitened w = whiten(m.Z, model.covariance());
  const Matrix v = extract_orthogonal(w.filter * model.M(), Matrix::identity(2), model.D_S());
  const Matrix y = recover(w.W, v);
  double err = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    err = std::max(err, std::abs(y(i, 0) - m.S(i, 0) / 1.0));
    err = std::max(err, std::abs(y(i, 1) - m.S(i, 1) / 2.0));
  }
  EXPECT_LT(err, 1e-8);
}

TEST(ApplyPrecision, Examples) {
  const Matrix m{{1, 0.3}, {0.2, 1}};
  EXPECT_EQ(apply_precision(m, 0.0).entries(), m.entries());
  EXPECT_EQ(apply_precision(Matrix{{1, 1e-9}, {0, 1}}, 1e-6).entries(), Matrix::identity(2).entries());
  EXPECT_EQ(apply_precision(Matrix{{1e-9, 1}, {1, 1e-9}}, 1e-6).entries(), (Matrix{{0, 1}, {1, 0}}).entries());
}

TEST(ApplyPrecision, SingularAfterRounding) {
  EXPECT_EQ(kind_of([] { apply_precision(Matrix{{1, 1e-9}, {1e-9, 1e-9}}, 1e-6); }),
            ErrorKind::SingularAfterRounding);
}

TEST(SeparationTest, DiagonalSwapAllTrue) {
  const MixingModel model(Matrix{{0, 2}, {3, 0}}, kLaplaceUniform);
  const SeparationReport r = separation_test(model, 100000, 1, GridSpec{}, 0.05, 1e-6);
  EXPECT_TRUE(r.verdict_a);
  EXPECT_TRUE(r.verdict_b);
  EXPECT_TRUE(r.verdict_c);
  EXPECT_TRUE(r.agree);
  EXPECT_LT(r.max_pairwise, 0.05);
}

TEST(SeparationTest, SumDifferenceAllFalse) {
  const MixingModel model(Matrix{{1, 1}, {1, -1}}, {RademacherLaw{}, RademacherLaw{}});
  const SeparationReport r = separation_test(model, 100000, 2, GridSpec{}, 0.05, 1e-6);
  EXPECT_FALSE(r.verdict_c);
  EXPECT_FALSE(r.verdict_a);
  EXPECT_FALSE(r.verdict_b);
  EXPECT_GT(r.max_pairwise, 0.3);
}

TEST(SeparationTest, TwoGaussianSourcesViolate) {
  const MixingModel model(Matrix{{1, 1}, {1, -1}}, {GaussianLaw{}, GaussianLaw{0, 2}});
  EXPECT_EQ(kind_of([&] { separation_test(model, 1000, 3, GridSpec{}, 0.05, 1e-6); }), ErrorKind::HypothesisViolated);
}

TEST(SeparationTest, ZeroDeltaViolates) {
  const MixingModel model(Matrix::identity(2), kLaplaceUniform);
  EXPECT_EQ(kind_of([&] { separation_test(model, 1000, 3, GridSpec{}, 0.0, 1e-6); }), ErrorKind::HypothesisViolated);
}

TEST(SeparationTest, RoundingFeedsVerdict) {
  const MixingModel model(Matrix{{1e-9, 2}, {3, 1e-9}}, kLaplaceUniform);
  const SeparationReport r = separation_test(model, 20000, 4, GridSpec{}, 0.05, 1e-6);
  EXPECT_TRUE(r.is_DP);
  EXPECT_EQ(r.M_used(0, 0), 0.0);
}
