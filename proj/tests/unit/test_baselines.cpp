#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "seqknock/baselines.hpp"
#include "seqknock/numeric.hpp"

using namespace seqknock;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

// BH by direct search over k, independent of the library's sort-and-scan.
std::vector<std::size_t> brute_bh(const Vector& p, double q) {
  const auto m = static_cast<std::size_t>(p.size());
  for (std::size_t k = m; k >= 1; --k) {
    std::vector<std::size_t> sel;
    for (std::size_t j = 0; j < m; ++j)
      if (p(static_cast<Index>(j)) <= static_cast<double>(k) * q / static_cast<double>(m)) sel.push_back(j);
    if (sel.size() >= k) return sel;
  }
  return {};
}

// Kolmogorov–Smirnov distance of a sample against U(0, 1).
double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace

TEST(BenjaminiHochberg, HandExample) {
  // thresholds 0.0125, 0.025, 0.0375, 0.05: k* = 2.
  EXPECT_EQ(bh_select(vec({0.01, 0.02, 0.04, 0.5}), 0.05), (std::vector<std::size_t>{0, 1}));
}

TEST(BenjaminiHochberg, StepUpReachesPastFailures) {
  // p_(1) = 0.04 > 0.025 fails alone but k = 2 passes.
  EXPECT_EQ(bh_select(vec({0.049, 0.04}), 0.05), (std::vector<std::size_t>{0, 1}));
}

TEST(BenjaminiHochberg, Extremes) {
  EXPECT_EQ(bh_select(vec({0, 0, 0}), 0.1).size(), 3u);
  EXPECT_TRUE(bh_select(vec({1, 1, 1}), 0.1).empty());
  EXPECT_THROW(bh_select(vec({0.5, 1.2}), 0.1), InvalidArgument);
  EXPECT_THROW(bh_select(vec({0.5}), 1.0), InvalidArgument);
}

TEST(BenjaminiYekutieli, HandExample) {
  // H_4 = 25/12; threshold for k = 1 is 0.05 / 4 / H_4 = 0.006.
  EXPECT_EQ(by_select(vec({0.001, 0.5, 0.6, 0.7}), 0.05), (std::vector<std::size_t>{0}));
  EXPECT_NEAR(harmonic_number(4), 25.0 / 12.0, 1e-15);
  EXPECT_TRUE(by_select(Vector(), 0.1).empty());
}

TEST(BenjaminiHochberg, MatchesBruteForceAndContainsBy) {
  SeededStream rng(401, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto m = static_cast<Index>(1 + rng.index(12));
    Vector p(m);
    for (Index j = 0; j < m; ++j) {
      const double u = rng.uniform();
      p(j) = rng.uniform() < 0.4 ? u * 0.02 : u;
    }
    const double q = 0.01 + 0.3 * rng.uniform();
    const auto bh = bh_select(p, q);
    ASSERT_EQ(bh, brute_bh(p, q)) << "rep " << rep;
    const auto by = by_select(p, q);
    ASSERT_TRUE(std::includes(bh.begin(), bh.end(), by.begin(), by.end()));
  }
}

TEST(RegressionPValues, PerfectFitGivesTinyPValue) {
  const Index n = 30;
  Vector a(n), b(n), y(n);
  SeededStream s(410, 0);
  for (Index i = 0; i < n; ++i) {
    a(i) = s.normal();
    b(i) = s.normal();
    y(i) = 3.0 * a(i) + 1e-9 * s.normal();
  }
  const auto p = regression_pvalues(from_matrix([&] {
                                      Matrix x(n, 2);
                                      x << a, b;
                                      return x;
                                    }()),
                                    y);
  EXPECT_LT(p.p_values(0), 1e-12);
  EXPECT_GT(p.p_values(1), 1e-6);
}

TEST(RegressionPValues, FivePointHandComputedTStatistic) {
  // y on x with intercept, x = 1..5, y = (1, 3, 2, 5, 4):
  // slope 0.8, SSE = 3.6, s² = 1.2, Sxx = 10, se = sqrt(0.12), t = 0.8 / se.
  // Two-sided p for t = 2.3094 on 3 df is 0.104088; cross-check via the
  // identity p = I_{3/(3+t²)}(3/2, 1/2).
  const auto x = from_matrix(vec({1, 2, 3, 4, 5}));
  const auto p = regression_pvalues(x, vec({1, 3, 2, 5, 4}));
  const double t = 0.8 / std::sqrt(0.12);
  const double expected = boost::math::ibeta(1.5, 0.5, 3.0 / (3.0 + t * t));
  EXPECT_NEAR(p.p_values(0), expected, 1e-9);
  EXPECT_NEAR(p.p_values(0), 0.104088, 1e-5);
}

TEST(RegressionPValues, CategoricalUsesBonferroniOverDummies) {
  const Index n = 60;
  SeededStream s(420, 0);
  std::vector<std::string> lab;
  Vector z(n), y(n);
  for (Index i = 0; i < n; ++i) {
    lab.push_back(std::string(1, static_cast<char>('a' + i % 3)));
    z(i) = s.normal();
    y(i) = (i % 3 == 2 ? 0.8 : 0.0) + s.normal();
  }
  const MixedDataMatrix x({{"g", CategoricalColumn::from_labels(lab)}, {"z", ContinuousColumn{z}}});
  const auto p = regression_pvalues(x, y);

  // the same fit on hand-made dummies
  Matrix d(n, 3);
  for (Index i = 0; i < n; ++i) d.row(i) << (i % 3 == 1), (i % 3 == 2), z(i);
  const auto q = regression_pvalues(from_matrix(d), y);
  EXPECT_NEAR(p.p_values(0), std::min(1.0, 2.0 * std::min(q.p_values(0), q.p_values(1))), 1e-12);
  EXPECT_NEAR(p.p_values(1), q.p_values(2), 1e-12);
}

TEST(RegressionPValues, RankDeficiencyIsReported) {
  EXPECT_THROW(regression_pvalues(from_matrix(Matrix::Ones(3, 2)), vec({1, 2, 3})), RankDeficient);
  Matrix x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  EXPECT_THROW(regression_pvalues(from_matrix(x), vec({1, 2, 3, 4, 5, 7})), RankDeficient);
  EXPECT_THROW(regression_pvalues(from_matrix(x), vec({1, 2})), DimensionMismatch);
}

TEST(RegressionPValues, NullPValuesAreUniform) {
  std::vector<double> ps;
  for (int rep = 0; rep < 100; ++rep) {
    SeededStream s(430, static_cast<std::uint64_t>(rep));
    const Index n = 60, p = 5;
    const Matrix x = sample_mvn(s, Vector::Zero(p), Matrix::Identity(p, p), n);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = s.normal();
    const auto pv = regression_pvalues(from_matrix(x), y);
    for (Index j = 0; j < p; ++j) ps.push_back(pv.p_values(j));
  }
  EXPECT_LE(ks_uniform(ps), 0.15);
}

TEST(PermutationLasso, NullDataUsuallySelectsNothing) {
  int empty = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    SeededStream s(440, static_cast<std::uint64_t>(rep));
    const Index n = 100, p = 10;
    const Matrix x = sample_mvn(s, Vector::Zero(p), Matrix::Identity(p, p), n);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = s.normal();
    SeededStream ps = s.child(1);
    PermutationLassoOptions opt;
    opt.permutations = 50;
    empty += permutation_lasso(from_matrix(x), y, 0.2, ps, opt).selected.empty();
  }
  EXPECT_GE(empty, 14);  // at least 70%
}

TEST(PermutationLasso, FindsStrongSignalsAndIsDeterministic) {
  SeededStream s(450, 0);
  const Index n = 200, p = 15;
  const Matrix x = sample_mvn(s, Vector::Zero(p), Matrix::Identity(p, p), n);
  Vector y = 1.0 * x.col(0) + 1.0 * x.col(1) + 1.0 * x.col(2);
  for (Index i = 0; i < n; ++i) y(i) += s.normal();
  PermutationLassoOptions opt;
  opt.permutations = 40;
  SeededStream a(451, 0), b(451, 0);
  const auto ra = permutation_lasso(from_matrix(x), y, 0.2, a, opt);
  opt.threads = 3;
  const auto rb = permutation_lasso(from_matrix(x), y, 0.2, b, opt);
  EXPECT_EQ(ra.selected, rb.selected);
  EXPECT_EQ(ra.fdr_hat, rb.fdr_hat);
  ASSERT_GE(ra.selected.size(), 3u);
  EXPECT_EQ(std::vector<std::size_t>(ra.selected.begin(), ra.selected.begin() + 3),
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_LE(ra.fdr_hat(ra.chosen), 0.2);
  EXPECT_EQ(ra.lambda_grid.size(), 100);
}

TEST(PermutationLasso, RejectsTooFewPermutations) {
  SeededStream s(460, 0);
  PermutationLassoOptions opt;
  opt.permutations = 5;
  EXPECT_THROW(permutation_lasso(from_matrix(Matrix::Identity(4, 2)), vec({1, 2, 3, 4}), 0.2, s, opt),
               InvalidArgument);
}
