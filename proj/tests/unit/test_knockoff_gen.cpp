#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "seqknock/knockoff_gen.hpp"
#include "seqknock/numeric.hpp"

using namespace seqknock;

namespace {

Matrix joint(const Matrix& x, const Matrix& xk) {
  Matrix out(x.rows(), 2 * x.cols());
  out << x, xk;
  return out;
}

double corr(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / (ca.norm() * cb.norm());
}

Matrix draw_rows(const Matrix& sigma, Index n, SeededStream& s) {
  return sample_mvn(s, Vector::Zero(sigma.rows()), cholesky(sigma), n);
}

}  // namespace

TEST(EquiS, EquicorrelatedClosedForm) {
  // λ_min of the equicorrelation matrix is 1 − ρ = 0.2, so s = 0.4.
  const Matrix sigma = covariance_matrix({5, CovarianceKind::equicorrelated, 0.8, 1.0});
  const Vector s = equi_s(sigma);
  for (Index j = 0; j < 5; ++j) EXPECT_NEAR(s(j), 0.4, 1e-12);
}

TEST(EquiS, ScalesWithVarianceAndCapsAtOne) {
  const Matrix sigma = covariance_matrix({3, CovarianceKind::independent, 0.0, 4.0});
  EXPECT_NEAR(equi_s(sigma)(1), 4.0, 1e-12);  // min(2 * 1, 1) * 4
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = 2.0;
  EXPECT_THROW(equi_s(bad), NotPositiveDefinite);
}

TEST(GaussianModel, JointCovarianceIsPositiveSemidefinite) {
  for (const double rho : {0.0, 0.3, 0.6, 0.9}) {
    for (const auto kind : {CovarianceKind::equicorrelated, CovarianceKind::ar1}) {
      const auto model = make_gaussian_model(covariance_matrix({6, kind, rho, 1.0}));
      EXPECT_GE(min_eigenvalue(model.joint_covariance()), -1e-10) << to_string(kind) << " " << rho;
      EXPECT_LE(model.shrink_steps, 20);
    }
  }
}

TEST(GaussianModel, SingularConditionalCovarianceIsShrunk) {
  // with s = 2 λ_min exactly, V = 2S − SΣ⁻¹S is singular and must be shrunk
  const auto model = make_gaussian_model(covariance_matrix({5, CovarianceKind::equicorrelated, 0.8, 1.0}));
  EXPECT_GE(model.shrink_steps, 1);
  EXPECT_NEAR(model.s(0), 0.4 * std::pow(0.95, model.shrink_steps), 1e-12);
}

TEST(GaussianModel, RejectsInvalidS) {
  const Matrix sigma = Matrix::Identity(2, 2);
  EXPECT_THROW(make_gaussian_model(sigma, Vector::Constant(2, 2.5)), InvalidArgument);
  EXPECT_THROW(make_gaussian_model(sigma, Vector::Constant(3, 0.5)), DimensionMismatch);
}

TEST(GaussianKnockoffs, EmpiricalJointCovarianceMatchesTarget) {
  const Matrix sigma = covariance_matrix({4, CovarianceKind::ar1, 0.5, 1.0});
  const auto model = make_gaussian_model(sigma);
  SeededStream xs(500, 0), ks(500, 1);
  const Matrix x = draw_rows(sigma, 50000, xs);
  const Matrix xk = gaussian_knockoffs(x, model, ks);
  const Matrix g = model.joint_covariance();
  const Matrix emp = sample_covariance(joint(x, xk));
  EXPECT_LE((emp - g).cwiseAbs().maxCoeff(), 0.02);

  // swapping any one pair leaves the joint covariance unchanged
  for (Index j = 0; j < 4; ++j) {
    Matrix swapped = joint(x, xk);
    swapped.col(j).swap(swapped.col(4 + j));
    EXPECT_LE((sample_covariance(swapped) - g).cwiseAbs().maxCoeff(), 0.02) << "swap " << j;
  }
}

TEST(GaussianKnockoffs, ZeroSReproducesTheData) {
  const Matrix sigma = covariance_matrix({3, CovarianceKind::ar1, 0.4, 1.0});
  const auto model = make_gaussian_model(sigma, Vector::Zero(3));
  SeededStream xs(510, 0), ks(510, 1);
  const Matrix x = draw_rows(sigma, 50, xs);
  EXPECT_LE((gaussian_knockoffs(x, model, ks) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GaussianKnockoffs, IdentityCovarianceGivesIndependentCopies) {
  const auto model = make_gaussian_model(Matrix::Identity(5, 5));
  SeededStream xs(520, 0), ks(520, 1);
  const Matrix x = draw_rows(Matrix::Identity(5, 5), 20000, xs);
  const Matrix xk = gaussian_knockoffs(x, model, ks);
  for (Index a = 0; a < 5; ++a)
    for (Index b = 0; b < 5; ++b) EXPECT_LE(std::abs(corr(x.col(a), xk.col(b))), 0.05);
}

TEST(GaussianKnockoffs, HonoursTheMean) {
  const Matrix sigma = Matrix::Identity(2, 2);
  Vector mean(2);
  mean << 5.0, -3.0;
  const auto model = make_gaussian_model(sigma, std::nullopt, mean);
  SeededStream xs(530, 0), ks(530, 1);
  const Matrix x = sample_mvn(xs, mean, cholesky(sigma), 20000);
  const Matrix xk = gaussian_knockoffs(x, model, ks);
  EXPECT_NEAR(xk.col(0).mean(), 5.0, 0.05);
  EXPECT_NEAR(xk.col(1).mean(), -3.0, 0.05);
  SeededStream bad(531, 0);
  EXPECT_THROW(gaussian_knockoffs(Matrix::Zero(3, 3), model, bad), DimensionMismatch);
}

TEST(EstimateCovariance, AddsRelativeRidge) {
  Matrix x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8;  // rank one
  const auto [sigma, mean] = estimate_covariance(x);
  const Matrix raw = sample_covariance(x);
  EXPECT_NEAR(sigma(0, 0) - raw(0, 0), 1e-6 * raw.trace() / 2.0, 1e-15);
  EXPECT_NO_THROW(cholesky(sigma));
  EXPECT_DOUBLE_EQ(mean(1), 5.0);
}

TEST(SequentialKnockoffs, ContinuousMarginalsAndCorrelation) {
  const Matrix sigma = covariance_matrix({4, CovarianceKind::ar1, 0.6, 1.0});
  SeededStream xs(540, 0), ks(540, 1);
  const Matrix x = draw_rows(sigma, 2000, xs);
  const auto res = sequential_knockoffs(from_matrix(x), ks);
  const Matrix xk = res.knockoffs.encode().first;
  for (Index j = 0; j < 4; ++j) {
    EXPECT_NEAR(xk.col(j).mean(), 0.0, 0.1);
    EXPECT_NEAR(std::sqrt(sample_covariance(Matrix(xk.col(j)))(0, 0)), 1.0, 0.1);
  }
  // neighbouring knockoff columns keep the ρ = 0.6 dependence
  for (Index j = 0; j + 1 < 4; ++j) EXPECT_NEAR(corr(xk.col(j), xk.col(j + 1)), 0.6, 0.1);
  EXPECT_EQ(res.order, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_FALSE(res.shuffled);
}

TEST(SequentialKnockoffs, CategoricalLevelsAndFrequencies) {
  SeededStream s(550, 0);
  const Index n = 1500;
  std::vector<std::string> lab;
  Vector z(n);
  for (Index i = 0; i < n; ++i) {
    z(i) = s.normal();
    const double u = s.uniform() + 0.3 * z(i);
    lab.push_back(u < 0.2 ? "low" : u < 0.7 ? "mid" : "high");
  }
  const MixedDataMatrix x({{"g", CategoricalColumn::from_labels(lab)}, {"z", ContinuousColumn{z}}});
  SeededStream ks(551, 0);
  const auto res = sequential_knockoffs(x, ks);
  ASSERT_TRUE(res.knockoffs.compatible_with(x));
  const auto& orig = x.column(0).categorical_data();
  const auto& kn = res.knockoffs.column(0).categorical_data();
  EXPECT_EQ(kn.levels, orig.levels);
  for (int level = 0; level < 3; ++level) {
    const auto fo = std::count(orig.codes.begin(), orig.codes.end(), level);
    const auto fk = std::count(kn.codes.begin(), kn.codes.end(), level);
    EXPECT_NEAR(static_cast<double>(fk) / n, static_cast<double>(fo) / n, 0.05) << orig.levels[static_cast<std::size_t>(level)];
  }
}

TEST(SequentialKnockoffs, DeterministicAndShuffledOrderIsAPermutation) {
  SeededStream xs(560, 0);
  const Matrix x = draw_rows(covariance_matrix({5, CovarianceKind::ar1, 0.3, 1.0}), 200, xs);
  const auto data = from_matrix(x);
  SeededStream a(561, 2), b(561, 2);
  const auto ra = sequential_knockoffs(data, a);
  const auto rb = sequential_knockoffs(data, b);
  EXPECT_EQ(ra.knockoffs.encode().first, rb.knockoffs.encode().first);

  SequentialOptions opt;
  opt.shuffle_order = true;
  SeededStream c(561, 2);
  const auto rc = sequential_knockoffs(data, c, opt);
  auto sorted = rc.order;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_TRUE(rc.shuffled);
}

TEST(SequentialKnockoffs, CollinearInputsAreRejected) {
  SeededStream s(570, 0);
  const Index n = 200;
  Vector a(n), b(n), c(n);
  for (Index i = 0; i < n; ++i) {
    a(i) = s.normal();
    b(i) = s.normal();
    c(i) = s.normal();
  }
  // duplicated column: pairwise |corr| > 0.99
  const MixedDataMatrix dup({{"a", ContinuousColumn{a}}, {"b", ContinuousColumn{b}},
                             {"a2", ContinuousColumn{Vector(a + 1e-4 * c)}}});
  SeededStream k1(571, 0);
  EXPECT_THROW(sequential_knockoffs(dup, k1), CollinearityError);
  // exact linear combination: pairwise correlations near 0.7 but R² ≈ 1
  const MixedDataMatrix combo({{"a", ContinuousColumn{a}}, {"b", ContinuousColumn{b}},
                               {"s", ContinuousColumn{Vector(a + b + 1e-5 * c)}}});
  SeededStream k2(572, 0);
  EXPECT_THROW(sequential_knockoffs(combo, k2), CollinearityError);
}

TEST(SequentialKnockoffs, RejectsDegenerateInput) {
  SeededStream s(580, 0);
  EXPECT_THROW(sequential_knockoffs(from_matrix(Matrix::Random(10, 1)), s), InvalidArgument);
  const MixedDataMatrix unseen({{"g", CategoricalColumn{{0, 0, 0, 0}, {"a", "b", "c"}}},
                                {"z", ContinuousColumn{Vector::LinSpaced(4, 0, 1)}}});
  EXPECT_THROW(sequential_knockoffs(unseen, s), InvalidArgument);
}
