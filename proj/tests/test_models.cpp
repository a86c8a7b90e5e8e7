#include <cmath>

#include <gtest/gtest.h>

#include "cfstab/dependence.hpp"
#include "cfstab/models.hpp"
#include "cfstab/stats.hpp"

using namespace cfstab;

namespace {

GoSystem kb(const CoordinateLaw& law, std::size_t d = 1) { return kac_bernstein_system(SourceSpec::iid(d, law)); }

}  // namespace

TEST(DeriveCoupling, KacBernstein) {
  const auto c = derive_coupling({Matrix{{1}}, Matrix{{1}}}, {Matrix{{1}}, Matrix{{-1}}});
  EXPECT_DOUBLE_EQ(c[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c[1](0, 0), -1.0);
}

TEST(DeriveCoupling, EqualCoefficientsGiveIdentity) {
  const Matrix a{{2, 1}, {0, 3}};
  const auto c = derive_coupling({a, a}, {a, a});
  for (const auto& m : c) EXPECT_LT(max_abs_diff(m, Matrix::identity(2)), 1e-15);
}

TEST(DeriveCoupling, TransposeOfB) {
  const auto c = derive_coupling({Matrix::identity(2)}, {Matrix{{1, 1}, {0, 1}}});
  EXPECT_EQ(max_abs_diff(c[0], Matrix{{1, 0}, {1, 1}}), 0.0);
}

TEST(PartitionClasses, Examples) {
  const Matrix id = Matrix::identity(2);
  EXPECT_EQ(partition_classes({id, -1.0 * id}), (Partition{{0}, {1}}));
  EXPECT_EQ(partition_classes({id, id, id}), (Partition{{0, 1, 2}}));
  const Matrix near = id + 1e-12 * Matrix{{1, 1}, {1, 1}};
  EXPECT_EQ(partition_classes({id, near}, 1e-9), (Partition{{0, 1}}));
}

TEST(PartitionClasses, FirstAppearanceOrder) {
  const Matrix a{{2}}, b{{3}};
  EXPECT_EQ(partition_classes({b, a, b, a}), (Partition{{0, 2}, {1, 3}}));
}

TEST(GoSystem, SingularCoefficientRejected) {
  try {
    GoSystem({Matrix{{0}}}, {Matrix{{1}}}, {SourceSpec::iid(1, GaussianLaw{})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
  }
}

TEST(SampleSystem, SingleRowIdentities) {
  const GoSystem sys({Matrix{{1, 2}, {0, 1}}, Matrix{{2, 0}, {1, 1}}}, {Matrix{{1, 0}, {0, 3}}, Matrix{{1, 1}, {0, 1}}},
                     {SourceSpec::iid(2, LaplaceLaw{}), SourceSpec::iid(2, UniformLaw{})});
  const SampleSet s = sample_system(sys, 1, 9);
  Vector s1(2), s2(2);
  for (std::size_t l = 0; l < 2; ++l) {
    const Vector x = s.X[l].row_vector(0);
    s1 = s1 + sys.A()[l] * x;
    s2 = s2 + sys.B()[l] * x;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(s.S1(0, k), s1[k], 1e-12);
    EXPECT_NEAR(s.S2(0, k), s2[k], 1e-12);
  }
}

TEST(SampleSystem, RademacherSupport) {
  const SampleSet s = sample_system(kb(RademacherLaw{}, 2), 1000, 1);
  for (const auto& x : s.X)
    for (double v : x.entries()) EXPECT_TRUE(v == 1.0 || v == -1.0);
}

TEST(SampleSystem, GaussianVariance) {
  const SampleSet s = sample_system(kb(GaussianLaw{}), 1000000, 2);
  for (const auto& x : s.X) EXPECT_NEAR(sample_covariance(x)(0, 0), 1.0, 0.01);
}

TEST(SampleSystem, ClassSumsAddMembers) {
  const Matrix id = Matrix::identity(1);
  const GoSystem sys({id, id, id}, {id, id, -1.0 * id}, std::vector<SourceSpec>(3, SourceSpec::iid(1, UniformLaw{})));
  ASSERT_EQ(sys.classes().size(), 2u);
  const SampleSet s = sample_system(sys, 50, 4);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_DOUBLE_EQ(s.Z[0](i, 0), s.Y[0](i, 0) + s.Y[1](i, 0));
}

TEST(Contaminate, LambdaZeroIsNoOp) {
  const GoSystem base = kb(LaplaceLaw{});
  const SampleSet a = sample_system(base, 500, 3), b = sample_system(contaminate(base, 0.0), 500, 3);
  EXPECT_EQ(a.S1.entries(), b.S1.entries());
  EXPECT_EQ(a.S2.entries(), b.S2.entries());
}

TEST(Contaminate, RangeChecked) {
  EXPECT_THROW(contaminate(kb(GaussianLaw{}), 1.5), Error);
  EXPECT_THROW(contaminate(kb(GaussianLaw{}), -0.1), Error);
}

TEST(Contaminate, FullContaminationIsDependent) {
  const SampleSet s = sample_system(contaminate(kb(GaussianLaw{}), 1.0), 100000, 5);
  EXPECT_GT(epsilon_T_dependence(s.S1, s.S2, GridSpec{}).epsilon, 0.05);
}

TEST(Contaminate, SweepNondecreasing) {
  const GoSystem base = kb(GaussianLaw{0.0, 0.25});
  double prev = 0.0;
  for (double lambda : {0.0, 0.1, 0.2, 0.4}) {
    const SampleSet s = sample_system(contaminate(base, lambda), 100000, 6);
    const double eps = epsilon_T_dependence(s.S1, s.S2, GridSpec{}).epsilon;
    EXPECT_GT(eps, prev - 0.01) << "lambda " << lambda;
    prev = eps;
  }
}

TEST(Contaminate, AnalyticCovarianceMatchesSamples) {
  const GoSystem sys = contaminate(kb(GaussianLaw{0.0, 0.25}), 0.3);
  const SampleSet s = sample_system(sys, 400000, 7);
  for (std::size_t k = 0; k < sys.classes().size(); ++k)
    EXPECT_NEAR(sample_covariance(s.Z[k])(0, 0), covariance_Z(sys, k)(0, 0), 0.01);
}
