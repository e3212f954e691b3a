#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqknock/elastic_net.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/mixed_data.hpp"
#include "seqknock/numeric.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

/// Equicorrelated knockoff parameters: s_j = min(2 λ_min(R), 1) · Σ_jj with
/// R the correlation matrix of Σ.
inline Vector equi_s(const Matrix& sigma) {
  cholesky(sigma);  // throws NotPositiveDefinite / InvalidArgument
  const Vector sd = sigma.diagonal().cwiseSqrt();
  const Matrix corr = sd.cwiseInverse().asDiagonal() * sigma * sd.cwiseInverse().asDiagonal();
  const double lambda = std::max(0.0, min_eigenvalue(corr));
  return std::min(2.0 * lambda, 1.0) * sigma.diagonal();
}

/// Everything needed to draw X̃ | X ~ N(m + (X − m)(I − Σ⁻¹S), 2S − SΣ⁻¹S).
struct GaussianKnockoffModel {
  Matrix sigma;
  Vector mean;       // m; zero for centred designs
  Vector s;          // after any shrinkage
  Matrix cond_coef;  // I − Σ⁻¹ diag(s)
  Matrix cond_chol;  // lower factor of V
  int shrink_steps = 0;

  /// Joint covariance of [X, X̃].
  [[nodiscard]] Matrix joint_covariance() const {
    const Index p = sigma.rows();
    Matrix g(2 * p, 2 * p);
    const Matrix off = sigma - Matrix(s.asDiagonal());
    g << sigma, off, off, sigma;
    return g;
  }
};

/// Build the sampling model; `s` defaults to equi_s(sigma). When V fails its
/// Cholesky check, s is multiplied by 0.95, at most 20 times.
inline GaussianKnockoffModel make_gaussian_model(const Matrix& sigma, std::optional<Vector> s = std::nullopt,
                                                 std::optional<Vector> mean = std::nullopt) {
  const Index p = sigma.rows();
  if (sigma.cols() != p || p < 1) throw DimensionMismatch("covariance must be square and non-empty");
  GaussianKnockoffModel model;
  model.sigma = sigma;
  model.s = s ? *s : equi_s(sigma);
  model.mean = mean ? *mean : Vector::Zero(p);
  if (model.s.size() != p || model.mean.size() != p) throw DimensionMismatch("s and mean need length p");
  for (Index j = 0; j < p; ++j) {
    if (model.s(j) < 0.0 || model.s(j) > 2.0 * sigma(j, j)) throw InvalidArgument("s outside [0, 2 Σ_jj]");
  }
  cholesky(sigma);  // validates Σ
  const Eigen::LLT<Matrix> llt(sigma);
  const Matrix sigma_inv = llt.solve(Matrix::Identity(p, p));
  for (int attempt = 0;; ++attempt) {
    const Matrix sinv_s = sigma_inv * model.s.asDiagonal();
    model.cond_coef = Matrix::Identity(p, p) - sinv_s;
    Matrix v = Matrix(2.0 * model.s.asDiagonal()) - model.s.asDiagonal() * sinv_s;
    v = 0.5 * (v + v.transpose()).eval();
    if (model.s.maxCoeff() == 0.0) {
      model.cond_chol = Matrix::Zero(p, p);
      return model;
    }
    try {
      model.cond_chol = cholesky(v);
      model.shrink_steps = attempt;
      return model;
    } catch (const NotPositiveDefinite&) {
      if (attempt == 20) throw NotPositiveDefinite("knockoff conditional covariance not positive definite after 20 shrinks");
      model.s *= 0.95;
    }
  }
}

/// Shrunk sample covariance Σ̂ + 1e-6 tr(Σ̂)/p I, with the sample mean.
inline std::pair<Matrix, Vector> estimate_covariance(const Matrix& x) {
  if (x.rows() < 2) throw InvalidArgument("covariance estimate needs at least 2 rows");
  Matrix sigma = sample_covariance(x);
  const double ridge = 1e-6 * sigma.trace() / static_cast<double>(sigma.rows());
  sigma.diagonal().array() += ridge > 0.0 ? ridge : 1e-12;
  return {sigma, x.colwise().mean().transpose()};
}

/// One knockoff copy of `x` (rows are observations).
inline Matrix gaussian_knockoffs(const Matrix& x, const GaussianKnockoffModel& model, SeededStream& stream) {
  const Index p = model.sigma.rows();
  if (x.cols() != p) {
    throw DimensionMismatch("design has " + std::to_string(x.cols()) + " columns, model expects " +
                            std::to_string(p));
  }
  Matrix mu = (x.rowwise() - model.mean.transpose()) * model.cond_coef;
  mu.rowwise() += model.mean.transpose();
  return mu + sample_mvn(stream, Vector::Zero(p), model.cond_chol, x.rows());
}

struct SequentialOptions {
  double alpha = 0.5;
  std::size_t folds = 10;
  bool shuffle_order = false;
  double max_r2 = 0.999;
  double max_abs_corr = 0.99;
  SolverControl control{};
};

struct SequentialResult {
  MixedDataMatrix knockoffs;
  std::vector<std::size_t> order;  // processing order of the columns
  bool shuffled = false;
};

namespace detail {

inline void check_pairwise_collinearity(const MixedDataMatrix& data, double limit) {
  const auto [x, owner] = data.encode();
  const Matrix centred = x.rowwise() - x.colwise().mean();
  const Vector norm = centred.colwise().norm().transpose();
  const Matrix cross = centred.transpose() * centred;
  for (Index a = 0; a < x.cols(); ++a) {
    for (Index b = 0; b < a; ++b) {
      if (owner[static_cast<std::size_t>(a)] == owner[static_cast<std::size_t>(b)]) continue;
      if (norm(a) == 0.0 || norm(b) == 0.0) continue;
      if (std::abs(cross(a, b)) / (norm(a) * norm(b)) > limit) {
        throw CollinearityError("columns '" + data.column(owner[static_cast<std::size_t>(a)]).name + "' and '" +
                                data.column(owner[static_cast<std::size_t>(b)]).name +
                                "' are nearly collinear (|corr| > " + std::to_string(limit) + ")");
      }
    }
  }
}

inline int draw_category(SeededStream& stream, const Eigen::Ref<const Eigen::RowVectorXd>& prob) {
  const double u = stream.uniform();
  double acc = 0.0;
  const auto k = static_cast<int>(prob.size());
  for (int c = 0; c < k - 1; ++c) {
    acc += prob(c);
    if (u < acc) return c;
  }
  return k - 1;
}

}  // namespace detail

/// Sequential knockoffs for mixed continuous/categorical columns.
///
/// For each column j in processing order, an elastic net (cross-validated
/// λ) is fitted of X_j on the other original columns and the knockoffs
/// already drawn. Continuous columns are sampled from N(η̂, σ̂²) with
/// σ̂² = RSS / (n − ŝ); categorical ones from the fitted class probabilities,
/// floored at 1e-12. Column j uses substreams child(2j + 1) (folds) and
/// child(2j + 2) (draws); child(0) shuffles the order when requested.
inline SequentialResult sequential_knockoffs(const MixedDataMatrix& data, SeededStream& stream,
                                             const SequentialOptions& opt = {}) {
  const std::size_t p = data.cols();
  const auto n = static_cast<Index>(data.rows());
  if (p < 2) throw InvalidArgument("sequential knockoffs need at least 2 columns");
  if (n < 3) throw InvalidArgument("sequential knockoffs need at least 3 rows");
  data.require_observed_levels();
  detail::check_pairwise_collinearity(data, opt.max_abs_corr);

  SequentialResult result;
  result.order.resize(p);
  std::iota(result.order.begin(), result.order.end(), std::size_t{0});
  if (opt.shuffle_order) {
    SeededStream order_stream = stream.child(0);
    order_stream.shuffle(result.order.begin(), result.order.end());
    result.shuffled = true;
  }

  std::vector<Matrix> original(p), knock(p);
  for (std::size_t j = 0; j < p; ++j) original[j] = data.encode_column(j);
  std::vector<Column> out(p);
  const std::size_t folds = std::min<std::size_t>(opt.folds, static_cast<std::size_t>(n));

  for (std::size_t pos = 0; pos < p; ++pos) {
    const std::size_t j = result.order[pos];
    Index width = 0;
    for (std::size_t k = 0; k < p; ++k) {
      if (k != j) width += original[k].cols();
    }
    for (std::size_t q = 0; q < pos; ++q) width += knock[result.order[q]].cols();
    Matrix x(n, width);
    Index at = 0;
    for (std::size_t k = 0; k < p; ++k) {
      if (k == j) continue;
      x.middleCols(at, original[k].cols()) = original[k];
      at += original[k].cols();
    }
    for (std::size_t q = 0; q < pos; ++q) {
      const Matrix& block = knock[result.order[q]];
      x.middleCols(at, block.cols()) = block;
      at += block.cols();
    }

    const Column& col = data.column(j);
    SeededStream fold_stream = stream.child(2 * j + 1);
    SeededStream draw_stream = stream.child(2 * j + 2);
    if (!col.categorical()) {
      const Vector& target = col.continuous_data().values;
      const DesignSpec design{std::move(x), target, true};
      const auto cv = fit_cv(design, opt.alpha, folds, fold_stream, opt.control);
      const Vector eta = predict(cv.fit, design.x).col(0);
      const double tss = (target.array() - target.mean()).square().sum();
      const double rss = (target - eta).squaredNorm();
      if (tss > 0.0 && 1.0 - rss / tss > opt.max_r2) {
        throw CollinearityError("column '" + col.name + "' is reproduced by the other columns with R^2 = " +
                                std::to_string(1.0 - rss / tss));
      }
      const double sd = std::sqrt(residual_variance(cv.fit, design).value);
      Vector draw(n);
      for (Index i = 0; i < n; ++i) draw(i) = eta(i) + sd * draw_stream.normal();
      knock[j] = draw;
      out[j] = Column{col.name, ContinuousColumn{std::move(draw)}};
    } else {
      const auto& c = col.categorical_data();
      const DesignSpec design{std::move(x), CategoricalResponse{c.codes, c.level_count()}, true};
      const auto cv = fit_cv(design, opt.alpha, folds, fold_stream, opt.control);
      Matrix prob = predict(cv.fit, design.x);
      prob = prob.cwiseMax(1e-12);
      prob.array().colwise() /= prob.rowwise().sum().array();
      CategoricalColumn drawn{{}, c.levels};
      drawn.codes.reserve(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) drawn.codes.push_back(detail::draw_category(draw_stream, prob.row(i)));
      out[j] = Column{col.name, std::move(drawn)};
      knock[j] = MixedDataMatrix({out[j]}).encode_column(0);
    }
  }
  result.knockoffs = MixedDataMatrix(std::move(out));
  return result;
}

}  // namespace seqknock
