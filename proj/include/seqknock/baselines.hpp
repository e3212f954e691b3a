#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "seqknock/detail/gaussian_cd.hpp"
#include "seqknock/elastic_net.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/mixed_data.hpp"
#include "seqknock/parallel.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

struct PValueSet {
  Vector p_values;
  std::string source = "ols_partial_t";
};

/// Two-sided partial-slope t-test p-values from OLS of y on the dummy-coded
/// design with an intercept. A categorical variable reports its smallest
/// dummy p-value times its number of dummies, capped at 1.
inline PValueSet regression_pvalues(const MixedDataMatrix& x, const Vector& y) {
  const auto [design, owner] = x.encode();
  const Index n = design.rows();
  const Index d = design.cols();
  if (y.size() != n) throw DimensionMismatch("response length does not match the design");
  if (n <= d + 1) throw RankDeficient("OLS needs n > d + 1 (n = " + std::to_string(n) + ", d = " + std::to_string(d) + ")");
  Matrix z(n, d + 1);
  z.col(0).setOnes();
  z.rightCols(d) = design;
  const Eigen::ColPivHouseholderQR<Matrix> qr(z);
  if (qr.rank() < d + 1) throw RankDeficient("design matrix is rank deficient");
  const Vector coef = qr.solve(y);
  const double dof = static_cast<double>(n - d - 1);
  const double sigma2 = (y - z * coef).squaredNorm() / dof;
  // diag((ZᵀZ)⁻¹) through the R factor: ZP = QR so (ZᵀZ)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ.
  const Matrix r = qr.matrixR().topLeftCorner(d + 1, d + 1).triangularView<Eigen::Upper>();
  const Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(d + 1, d + 1));
  const Vector diag_perm = rinv.rowwise().squaredNorm();
  Vector diag(d + 1);
  for (Index k = 0; k < d + 1; ++k) diag(qr.colsPermutation().indices()(k)) = diag_perm(k);

  const boost::math::students_t dist(dof);
  PValueSet out;
  out.p_values = Vector::Ones(static_cast<Index>(x.cols()));
  std::vector<double> best(x.cols(), 1.0);
  std::vector<int> dummies(x.cols(), 0);
  for (Index k = 0; k < d; ++k) {
    const double se = std::sqrt(sigma2 * diag(k + 1));
    const double t = se > 0.0 ? coef(k + 1) / se : std::numeric_limits<double>::infinity();
    const double p = std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))) : 0.0;
    const auto j = owner[static_cast<std::size_t>(k)];
    best[j] = std::min(best[j], p);
    ++dummies[j];
  }
  for (std::size_t j = 0; j < x.cols(); ++j) {
    out.p_values(static_cast<Index>(j)) = std::clamp(best[j] * std::max(1, dummies[j]), 0.0, 1.0);
  }
  return out;
}

/// Benjamini–Hochberg step-up: k* = max{k : p_(k) ≤ k q / m}; selects every
/// index with p ≤ p_(k*). Result sorted ascending.
inline std::vector<std::size_t> bh_select(const Vector& p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  const auto m = static_cast<std::size_t>(p.size());
  for (Index j = 0; j < p.size(); ++j) {
    if (!(p(j) >= 0.0 && p(j) <= 1.0)) throw InvalidArgument("p-values must lie in [0, 1]");
  }
  std::vector<double> sorted(p.data(), p.data() + p.size());
  std::sort(sorted.begin(), sorted.end());
  double cut = -1.0;
  for (std::size_t k = m; k >= 1; --k) {
    if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m)) {
      cut = sorted[k - 1];
      break;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < m; ++j) {
    if (p(static_cast<Index>(j)) <= cut) out.push_back(j);
  }
  return out;
}

inline std::vector<std::size_t> bh_select(const PValueSet& p, double q) { return bh_select(p.p_values, q); }

inline double harmonic_number(std::size_t m) {
  double h = 0.0;
  for (std::size_t i = 1; i <= m; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

/// Benjamini–Yekutieli: BH at level q / H_m.
inline std::vector<std::size_t> by_select(const Vector& p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  if (p.size() == 0) return {};
  return bh_select(p, q / harmonic_number(static_cast<std::size_t>(p.size())));
}

inline std::vector<std::size_t> by_select(const PValueSet& p, double q) { return by_select(p.p_values, q); }

struct PermutationLassoOptions {
  std::size_t permutations = 100;
  std::size_t grid_size = 100;
  std::size_t threads = 1;
  SolverControl control{};
};

struct PermutationLassoResult {
  std::vector<std::size_t> selected;
  Vector lambda_grid;
  Vector original_count;  // variables selected on the original data, per λ
  Vector permuted_mean;   // mean count over permutations, per λ
  Vector fdr_hat;
  Index chosen = -1;      // grid index, -1 if none qualified
};

/// Permutation lasso. The lasso path (α = 1) of y on the dummy-coded design
/// is fitted on one λ grid; each permutation of y is refitted on the same
/// grid, reusing the standardised Gram matrix. FDR̂(λ) is the mean permuted
/// selection count over max(1, original count); the original selection at the
/// smallest λ with FDR̂ ≤ q is returned. Permutation b uses stream.child(b).
inline PermutationLassoResult permutation_lasso(const MixedDataMatrix& x, const Vector& y, double q,
                                                SeededStream& stream, const PermutationLassoOptions& opt = {}) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  if (opt.permutations < 10) throw InvalidArgument("permutation lasso needs at least 10 permutations");
  const auto [design, owner] = x.encode();
  const Index n = design.rows();
  if (y.size() != n) throw DimensionMismatch("response length does not match the design");
  const DesignSpec spec{design, y, true};
  PermutationLassoResult out;
  out.lambda_grid = lambda_grid(spec, 1.0, opt.grid_size);
  const Index nl = out.lambda_grid.size();

  const auto prob = detail::gaussian_problem(design, y, true);
  const auto k = static_cast<Index>(prob.kept.size());
  Matrix xs(n, k);
  for (Index a = 0; a < k; ++a) {
    const auto j = prob.kept[static_cast<std::size_t>(a)];
    xs.col(a) = (design.col(j).array() - prob.mean(j)) / prob.scale(j);
  }
  const auto variables_selected = [&](const Vector& beta) {
    std::vector<char> hit(x.cols(), 0);
    for (Index a = 0; a < k; ++a) {
      if (beta(a) != 0.0) hit[owner[static_cast<std::size_t>(prob.kept[static_cast<std::size_t>(a)])]] = 1;
    }
    return hit;
  };
  const auto count = [](const std::vector<char>& hit) {
    return static_cast<double>(std::count(hit.begin(), hit.end(), char{1}));
  };

  std::vector<std::vector<char>> original(static_cast<std::size_t>(nl));
  out.original_count = Vector::Zero(nl);
  {
    detail::GaussianCd cd(prob.gram, prob.xty, prob.y_var);
    for (Index l = 0; l < nl; ++l) {
      cd.solve(detail::make_penalty(out.lambda_grid(l), 1.0), opt.control);
      original[static_cast<std::size_t>(l)] = variables_selected(cd.beta());
      out.original_count(l) = count(original[static_cast<std::size_t>(l)]);
    }
  }

  Matrix counts = Matrix::Zero(nl, static_cast<Index>(opt.permutations));
  const Vector yc = y.array() - y.mean();
  parallel_for(opt.permutations, opt.threads, [&](std::size_t b) {
    SeededStream ps = stream.child(b);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    ps.shuffle(perm.begin(), perm.end());
    Vector yp(n);
    for (Index i = 0; i < n; ++i) yp(i) = yc(perm[static_cast<std::size_t>(i)]);
    detail::GaussianCd cd(prob.gram, xs.transpose() * yp / static_cast<double>(n), prob.y_var);
    for (Index l = 0; l < nl; ++l) {
      cd.solve(detail::make_penalty(out.lambda_grid(l), 1.0), opt.control);
      counts(l, static_cast<Index>(b)) = count(variables_selected(cd.beta()));
    }
  });
  out.permuted_mean = counts.rowwise().mean();
  out.fdr_hat = out.permuted_mean.array() / out.original_count.array().max(1.0);
  for (Index l = nl - 1; l >= 0; --l) {
    if (out.fdr_hat(l) <= q) {
      out.chosen = l;
      break;
    }
  }
  if (out.chosen >= 0) {
    const auto& hit = original[static_cast<std::size_t>(out.chosen)];
    for (std::size_t j = 0; j < hit.size(); ++j) {
      if (hit[j]) out.selected.push_back(j);
    }
  }
  return out;
}

}  // namespace seqknock
