#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seqknock/numeric.hpp"
#include "seqknock/rng.hpp"

using namespace seqknock;

TEST(Cholesky, IdentityIsItsOwnFactor) {
  const Matrix eye = Matrix::Identity(3, 3);
  EXPECT_TRUE(cholesky(eye).isApprox(eye, 1e-15));
}

TEST(Cholesky, HandFactorisedTwoByTwo) {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  Matrix expected(2, 2);
  expected << 2, 0, 1, std::sqrt(2.0);
  const Matrix l = cholesky(a);
  EXPECT_NEAR((l - expected).cwiseAbs().maxCoeff(), 0.0, 1e-14);
  EXPECT_NEAR((l * l.transpose() - a).norm(), 0.0, 1e-13);
}

TEST(Cholesky, RejectsIndefiniteEquicorrelated) {
  // eigenvalue 1 + 2ρ = -0.2 < 0; build directly since covariance_matrix refuses it.
  Matrix a = Matrix::Constant(3, 3, -0.6);
  a.diagonal().setOnes();
  EXPECT_THROW(cholesky(a), NotPositiveDefinite);
  EXPECT_THROW(covariance_matrix({3, CovarianceKind::equicorrelated, -0.6, 1.0}), InvalidArgument);
}

TEST(Cholesky, RejectsAsymmetricInput) {
  Matrix a(2, 2);
  a << 1, 0.5, 0.4, 1;
  EXPECT_THROW(cholesky(a), InvalidArgument);
}

TEST(Cholesky, RoundTripOnRandomSpdMatrices) {
  SeededStream rng(11, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = static_cast<Index>(1 + rng.index(20));
    Matrix b(p, p);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) b(i, j) = rng.normal();
    const Matrix a = b * b.transpose() + 0.1 * Matrix::Identity(p, p);
    const Matrix l = cholesky(a);
    EXPECT_LE((l * l.transpose() - a).norm() / a.norm(), 1e-8);
    EXPECT_TRUE(l.isLowerTriangular());
  }
}

TEST(CovarianceMatrix, Structures) {
  const Matrix ar = covariance_matrix({4, CovarianceKind::ar1, 0.5, 2.0});
  EXPECT_DOUBLE_EQ(ar(0, 3), 2.0 * 0.125);
  EXPECT_DOUBLE_EQ(ar(2, 2), 2.0);
  const Matrix eq = covariance_matrix({3, CovarianceKind::equicorrelated, 0.3, 1.0});
  EXPECT_DOUBLE_EQ(eq(0, 1), 0.3);
  const Matrix ind = covariance_matrix({3, CovarianceKind::independent, 0.9, 0.5});
  EXPECT_TRUE(ind.isApprox(0.5 * Matrix::Identity(3, 3)));
  EXPECT_TRUE(covariance_matrix({5, CovarianceKind::equicorrelated, 0.0, 1.0})
                  .isApprox(covariance_matrix({5, CovarianceKind::independent, 0.0, 1.0})));
}

TEST(SampleMvn, ZeroFactorRepeatsTheMean) {
  SeededStream rng(3, 1);
  const Vector mu = (Vector(3) << 1.5, -2.0, 0.25).finished();
  const Matrix draws = sample_mvn(rng, mu, Matrix::Zero(3, 3), 20);
  for (Index i = 0; i < draws.rows(); ++i) EXPECT_EQ(draws.row(i), mu.transpose());
}

TEST(SampleMvn, MatchesAr1CovarianceAtLargeN) {
  const Matrix sigma = covariance_matrix({4, CovarianceKind::ar1, 0.5, 1.0});
  SeededStream rng(2024, 7);
  const Matrix draws = sample_mvn(rng, Vector::Zero(4), cholesky(sigma), 50'000);
  const Matrix emp = sample_covariance(draws);
  EXPECT_LE((emp - sigma).cwiseAbs().maxCoeff(), 0.02);
  // per-coordinate mean within 4 sigma / sqrt(n)
  const Vector mean = draws.colwise().mean().transpose();
  for (Index j = 0; j < 4; ++j) EXPECT_LE(std::abs(mean(j)), 4.0 / std::sqrt(50'000.0));
}

TEST(SampleMvn, DeterministicForFixedStream) {
  const Matrix l = cholesky(covariance_matrix({3, CovarianceKind::equicorrelated, 0.4, 1.0}));
  SeededStream a(99, 5), b(99, 5), c(99, 6);
  const Matrix x = sample_mvn(a, Vector::Zero(3), l, 100);
  const Matrix y = sample_mvn(b, Vector::Zero(3), l, 100);
  const Matrix z = sample_mvn(c, Vector::Zero(3), l, 100);
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
}

TEST(SampleMvn, DimensionMismatchThrows) {
  SeededStream rng(1, 1);
  EXPECT_THROW(sample_mvn(rng, Vector::Zero(3), Matrix::Identity(2, 2), 5), DimensionMismatch);
}

TEST(NormalScore, ThreePointExample) {
  const Vector out = normal_score_transform(Vector((Vector(3) << 10, 20, 30).finished()));
  EXPECT_NEAR(out(0), -0.9674, 5e-5);
  EXPECT_NEAR(out(1), 0.0, 1e-12);
  EXPECT_NEAR(out(2), 0.9674, 5e-5);
  EXPECT_NEAR(out(0), normal_quantile(1.0 / 6.0), 1e-15);
}

TEST(NormalScore, ConstantColumnMapsToZero) {
  const Vector out = normal_score_transform(Vector::Constant(4, 5.0));
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(out(i), 0.0, 1e-12);
}

TEST(NormalScore, FollowsRanksUnderShuffling) {
  SeededStream rng(8, 0);
  std::vector<double> sorted(25);
  for (std::size_t i = 0; i < sorted.size(); ++i) sorted[i] = static_cast<double>(i) * 1.7 - 3.0;
  auto shuffled = sorted;
  rng.shuffle(shuffled.begin(), shuffled.end());
  const Vector a = normal_score_transform(std::span<const double>(sorted));
  const Vector b = normal_score_transform(std::span<const double>(shuffled));
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    const auto rank = static_cast<Index>(std::lower_bound(sorted.begin(), sorted.end(), shuffled[i]) - sorted.begin());
    EXPECT_DOUBLE_EQ(b(static_cast<Index>(i)), a(rank));
  }
}

TEST(NormalScore, TiesShareAverageRank) {
  const Vector out = normal_score_transform(Vector((Vector(4) << 1, 2, 2, 3).finished()));
  EXPECT_DOUBLE_EQ(out(1), out(2));
  EXPECT_DOUBLE_EQ(out(1), 0.0);  // average rank 2.5 -> (2.5 - 0.5)/4 = 0.5
}

TEST(NormalScore, SumsToZeroAndIsMonotone) {
  SeededStream rng(17, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(57);
    for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal() * 3.0 + rng.uniform();
    const Vector z = normal_score_transform(x);
    EXPECT_NEAR(z.sum(), 0.0, 1e-9);
    for (Index i = 0; i < x.size(); ++i)
      for (Index j = 0; j < x.size(); ++j)
        if (x(i) < x(j)) EXPECT_LT(z(i), z(j));
  }
}

TEST(NormalScore, RejectsSingleValue) {
  EXPECT_THROW(normal_score_transform(Vector::Constant(1, 2.0)), InvalidArgument);
}

TEST(SeededStream, ChildStreamsAreStableAndDistinct) {
  SeededStream a(5, 9);
  const auto c1 = a.child(1);
  a.normal();
  a.normal();
  auto c1_again = a.child(1);
  auto c1_copy = c1;
  EXPECT_EQ(c1_copy.next_u64(), c1_again.next_u64());
  auto c2 = SeededStream(5, 9).child(2);
  auto c1b = SeededStream(5, 9).child(1);
  EXPECT_NE(c1b.next_u64(), c2.next_u64());
  EXPECT_EQ(SeededStream::for_draw(1, 3, 4).stream_id(), (3ULL << 20) + 4);
}

TEST(SeededStream, UniformMomentsAndIndexRange) {
  SeededStream rng(1, 2);
  double sum = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100'000.0, 0.5, 0.005);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.index(7), 7u);
}
