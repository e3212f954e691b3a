#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "seqknock/detail/gaussian_cd.hpp"
#include "seqknock/detail/multinomial_cd.hpp"
#include "seqknock/detail/solver_control.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/numeric.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

enum class Family { gaussian, multinomial };

/// Class labels coded 0..levels-1.
struct CategoricalResponse {
  std::vector<int> codes;
  int levels = 2;
};

using Response = std::variant<Vector, CategoricalResponse>;

/// Regression problem: numeric design (categoricals already dummy-coded) and
/// a continuous or categorical response.
struct DesignSpec {
  Matrix x;
  Response y;
  bool standardize = true;

  [[nodiscard]] Family family() const {
    return std::holds_alternative<Vector>(y) ? Family::gaussian : Family::multinomial;
  }
};

/// One point on an elastic-net path.
///
/// Coefficients are on the original column scale. `objective` is the
/// penalised loss the solver minimised, with the penalty applied to the
/// standardised coefficients.
struct ElasticNetFit {
  Family family = Family::gaussian;
  Matrix beta;       // d × 1, or d × K for multinomial
  Vector intercept;  // length 1, or K
  double lambda = 0.0;
  double alpha = 0.5;
  std::size_t nnz = 0;
  std::optional<double> sigma2_hat;  // gaussian only: RSS / (n − nnz)
  double objective = 0.0;
  std::size_t cycles = 0;
  std::vector<Index> dropped_columns;  // constant columns, coefficients fixed at 0
};

struct CvResult {
  Vector lambda_grid;
  Vector cv_loss;
  Vector cv_se;
  double lambda_min = 0.0;
  std::size_t index_min = 0;
  std::vector<int> fold_of;  // fold index per observation
};

/// Full-data fit at the cross-validated penalty, with its CV record.
struct CvFit {
  CvResult cv;
  ElasticNetFit fit;
};

struct VarianceEstimate {
  double value = 0.0;
  bool degenerate = false;  // n − ŝ < 1; value falls back to RSS / n
};

namespace detail {

inline void validate(const DesignSpec& design) {
  const Index n = design.x.rows();
  if (n < 2) throw InvalidArgument("design needs at least 2 observations");
  if (design.x.cols() < 1) throw InvalidArgument("design needs at least 1 column");
  if (const auto* y = std::get_if<Vector>(&design.y)) {
    if (y->size() != n) throw DimensionMismatch("response length does not match design rows");
  } else {
    const auto& c = std::get<CategoricalResponse>(design.y);
    if (static_cast<Index>(c.codes.size()) != n) {
      throw DimensionMismatch("response length does not match design rows");
    }
    if (c.levels < 2) throw InvalidArgument("categorical response needs at least 2 levels");
    for (const int code : c.codes) {
      if (code < 0 || code >= c.levels) throw InvalidArgument("response code out of range");
    }
  }
}

struct Scaling {
  Vector mean;
  Vector scale;  // 0 for dropped columns
  std::vector<Index> kept;
};

inline Scaling column_scaling(const Matrix& x, bool standardize) {
  Scaling s;
  s.mean = x.colwise().mean().transpose();
  s.scale = Vector::Zero(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().mean();
    const double second = x.col(j).squaredNorm() / static_cast<double>(x.rows());
    if (var > 1e-13 * second && var > 1e-300) {
      s.kept.push_back(j);
      s.scale(j) = standardize ? std::sqrt(var) : 1.0;
    }
  }
  return s;
}

inline Matrix standardized_columns(const Matrix& x, const Scaling& s) {
  Matrix out(x.rows(), static_cast<Index>(s.kept.size()));
  for (Index a = 0; a < out.cols(); ++a) {
    const auto j = s.kept[static_cast<std::size_t>(a)];
    out.col(a) = (x.col(j).array() - s.mean(j)) / s.scale(j);
  }
  return out;
}

inline std::vector<Index> dropped(const std::vector<Index>& kept, Index d) {
  std::vector<Index> out;
  std::size_t a = 0;
  for (Index j = 0; j < d; ++j) {
    if (a < kept.size() && kept[a] == j) {
      ++a;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

inline double max_abs_alpha(double alpha) { return std::max(alpha, 1e-3); }

inline Vector log_grid(double lambda_max, double ratio, std::size_t count) {
  Vector grid(static_cast<Index>(count));
  if (count == 1) {
    grid(0) = lambda_max;
    return grid;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    grid(static_cast<Index>(k)) = lambda_max * std::pow(ratio, t);
  }
  return grid;
}

inline Matrix one_hot(const CategoricalResponse& c) {
  Matrix y = Matrix::Zero(static_cast<Index>(c.codes.size()), c.levels);
  for (std::size_t i = 0; i < c.codes.size(); ++i) y(static_cast<Index>(i), c.codes[i]) = 1.0;
  return y;
}

inline ElasticNetFit gaussian_fit(const GaussianProblem& prob, const GaussianCd& cd, Index d,
                                  double lambda, double alpha) {
  ElasticNetFit fit;
  fit.family = Family::gaussian;
  fit.lambda = lambda;
  fit.alpha = alpha;
  fit.beta = Matrix::Zero(d, 1);
  double offset = 0.0;
  for (std::size_t a = 0; a < prob.kept.size(); ++a) {
    const auto j = prob.kept[a];
    const double b = cd.beta()(static_cast<Index>(a)) / prob.scale(j);
    fit.beta(j, 0) = b;
    offset += prob.mean(j) * b;
    if (b != 0.0) ++fit.nnz;
  }
  fit.intercept = Vector::Constant(1, prob.y_mean - offset);
  const Penalty pen = make_penalty(lambda, alpha);
  fit.objective = cd.objective(pen);
  const double rss = 2.0 * prob.n * cd.half_rss();
  const double dof = prob.n - static_cast<double>(fit.nnz);
  fit.sigma2_hat = dof >= 1.0 ? rss / dof : rss / prob.n;
  fit.cycles = cd.cycles();
  fit.dropped_columns = dropped(prob.kept, d);
  return fit;
}

/// Multinomial fit state covering classes missing from the training data.
struct MultinomialPath {
  Scaling scaling;
  std::vector<int> present;  // original class index for each solver class
  std::optional<MultinomialCd> cd;
  int levels = 2;
  Index d = 0;

  ElasticNetFit snapshot(double lambda, double alpha) const {
    ElasticNetFit fit;
    fit.family = Family::multinomial;
    fit.lambda = lambda;
    fit.alpha = alpha;
    fit.beta = Matrix::Zero(d, levels);
    fit.intercept = Vector::Zero(levels);
    if (!cd) {
      // single observed class
      fit.intercept.setConstant(-30.0);
      fit.intercept(present.front()) = 0.0;
    } else {
      const Matrix& b = cd->beta();
      const Vector& b0 = cd->intercept();
      double lowest = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < present.size(); ++c) {
        const int k = present[c];
        double offset = 0.0;
        for (std::size_t a = 0; a < scaling.kept.size(); ++a) {
          const auto j = scaling.kept[a];
          const double v = b(static_cast<Index>(a), static_cast<Index>(c)) / scaling.scale(j);
          fit.beta(j, k) = v;
          offset += scaling.mean(j) * v;
          if (v != 0.0) ++fit.nnz;
        }
        fit.intercept(k) = b0(static_cast<Index>(c)) - offset;
        lowest = std::min(lowest, fit.intercept(k));
      }
      if (static_cast<int>(present.size()) < levels) {
        std::vector<char> seen(static_cast<std::size_t>(levels), 0);
        for (const int k : present) seen[static_cast<std::size_t>(k)] = 1;
        for (int k = 0; k < levels; ++k) {
          if (!seen[static_cast<std::size_t>(k)]) fit.intercept(k) = lowest - 30.0;
        }
      }
      fit.intercept.array() -= fit.intercept.mean();
      fit.objective = cd->objective(make_penalty(lambda, alpha));
      fit.cycles = cd->cycles();
    }
    fit.dropped_columns = dropped(scaling.kept, d);
    return fit;
  }
};

inline MultinomialPath multinomial_path(const Matrix& x, const CategoricalResponse& y,
                                        bool standardize) {
  MultinomialPath path;
  path.levels = y.levels;
  path.d = x.cols();
  path.scaling = column_scaling(x, standardize);
  std::vector<int> count(static_cast<std::size_t>(y.levels), 0);
  for (const int c : y.codes) ++count[static_cast<std::size_t>(c)];
  std::vector<int> remap(static_cast<std::size_t>(y.levels), -1);
  for (int k = 0; k < y.levels; ++k) {
    if (count[static_cast<std::size_t>(k)] > 0) {
      remap[static_cast<std::size_t>(k)] = static_cast<int>(path.present.size());
      path.present.push_back(k);
    }
  }
  if (path.present.size() >= 2) {
    std::vector<int> codes(y.codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = remap[static_cast<std::size_t>(y.codes[i])];
    path.cd.emplace(standardized_columns(x, path.scaling), std::move(codes),
                    static_cast<int>(path.present.size()));
  }
  return path;
}

}  // namespace detail

/// Decreasing penalty grid: λ_max = max_j |(1/n)⟨x̃_j, y − ȳ⟩| / max(α, 1e-3)
/// over standardised columns (and classes), then `count` log-spaced values
/// down to λ_max·1e-4 when n > d, or λ_max·1e-2 otherwise.
inline Vector lambda_grid(const DesignSpec& design, double alpha, std::size_t count = 100) {
  detail::validate(design);
  const Index n = design.x.rows();
  const Index d = design.x.cols();
  double top = 0.0;
  if (const auto* y = std::get_if<Vector>(&design.y)) {
    const auto prob = detail::gaussian_problem(design.x, *y, design.standardize);
    if (prob.xty.size() > 0) top = prob.xty.cwiseAbs().maxCoeff();
  } else {
    const auto& c = std::get<CategoricalResponse>(design.y);
    const auto s = detail::column_scaling(design.x, design.standardize);
    const Matrix xs = detail::standardized_columns(design.x, s);
    Matrix resp = detail::one_hot(c);
    resp.rowwise() -= resp.colwise().mean();
    if (xs.cols() > 0) top = (xs.transpose() * resp).cwiseAbs().maxCoeff() / static_cast<double>(n);
  }
  top /= detail::max_abs_alpha(alpha);
  if (!(top > 0.0)) top = 1e-6;  // degenerate: response constant or every column dropped
  return detail::log_grid(top, n > d ? 1e-4 : 1e-2, count);
}

/// Fit the elastic net along a decreasing penalty grid with warm starts.
///
/// Minimises (1/n) Σ ℓ(y_i, η_i) + λ[(1−α)‖β‖²/2 + α‖β‖₁] on standardised
/// columns, with ℓ the squared error / 2 (gaussian) or the multinomial
/// negative log-likelihood. The intercept is never penalised.
inline std::vector<ElasticNetFit> fit_path(const DesignSpec& design, double alpha = 0.5,
                                           const std::optional<Vector>& grid = std::nullopt,
                                           const SolverControl& ctl = {}) {
  detail::validate(design);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  const Vector lambdas = grid ? *grid : lambda_grid(design, alpha);
  for (Index k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas(k) >= 0.0)) throw InvalidArgument("penalty values must be non-negative");
    if (k > 0 && lambdas(k) > lambdas(k - 1)) throw InvalidArgument("penalty grid must be decreasing");
  }
  std::vector<ElasticNetFit> fits;
  fits.reserve(static_cast<std::size_t>(lambdas.size()));
  if (const auto* y = std::get_if<Vector>(&design.y)) {
    const auto prob = detail::gaussian_problem(design.x, *y, design.standardize);
    detail::GaussianCd cd(prob.gram, prob.xty, prob.y_var);
    for (Index k = 0; k < lambdas.size(); ++k) {
      cd.solve(detail::make_penalty(lambdas(k), alpha), ctl);
      fits.push_back(detail::gaussian_fit(prob, cd, design.x.cols(), lambdas(k), alpha));
    }
  } else {
    auto path = detail::multinomial_path(design.x, std::get<CategoricalResponse>(design.y),
                                         design.standardize);
    for (Index k = 0; k < lambdas.size(); ++k) {
      if (path.cd) path.cd->solve(detail::make_penalty(lambdas(k), alpha), ctl);
      fits.push_back(path.snapshot(lambdas(k), alpha));
    }
  }
  return fits;
}

/// Linear predictor / class probabilities for new rows.
///
/// Gaussian fits give an m×1 matrix intercept + X β; multinomial fits give an
/// m×K matrix of row-stochastic probabilities.
inline Matrix predict(const ElasticNetFit& fit, const Matrix& x_new) {
  if (x_new.cols() != fit.beta.rows()) {
    throw DimensionMismatch("predict: design has " + std::to_string(x_new.cols()) +
                            " columns, fit expects " + std::to_string(fit.beta.rows()));
  }
  Matrix eta = x_new * fit.beta;
  eta.rowwise() += fit.intercept.transpose();
  if (fit.family == Family::gaussian) return eta;
  Matrix prob;
  detail::softmax_rows(eta, prob);
  return prob;
}

/// σ̂² = RSS / (n − ŝ) for a gaussian fit, ŝ the number of nonzero
/// coefficients. Falls back to RSS / n (flagged) when n − ŝ < 1.
inline VarianceEstimate residual_variance(const ElasticNetFit& fit, const DesignSpec& design) {
  if (fit.family != Family::gaussian || design.family() != Family::gaussian) {
    throw InvalidArgument("residual_variance applies to gaussian fits only");
  }
  const auto& y = std::get<Vector>(design.y);
  const Vector resid = y - predict(fit, design.x).col(0);
  const double rss = resid.squaredNorm();
  const double n = static_cast<double>(y.size());
  const double dof = n - static_cast<double>(fit.nnz);
  if (dof < 1.0) return {rss / n, true};
  return {rss / dof, false};
}

/// Largest violation of the elastic-net stationarity conditions, recomputed
/// from the data: for zero coefficients max(0, |g_j| − λα), otherwise
/// |g_j − λ(1−α)β_j − λα sign β_j|, with g_j = (1/n)⟨x̃_j, r⟩ on standardised
/// columns and r the response residual (y − p for multinomial). The intercept
/// condition (mean residual = 0) is included.
inline double kkt_violation(const ElasticNetFit& fit, const DesignSpec& design) {
  detail::validate(design);
  const auto s = detail::column_scaling(design.x, design.standardize);
  const Matrix xs = detail::standardized_columns(design.x, s);
  const double n = static_cast<double>(design.x.rows());
  const auto pen = detail::make_penalty(fit.lambda, fit.alpha);
  Matrix resid;
  if (const auto* y = std::get_if<Vector>(&design.y)) {
    resid = *y - predict(fit, design.x).col(0);
  } else {
    resid = detail::one_hot(std::get<CategoricalResponse>(design.y)) - predict(fit, design.x);
  }
  const Matrix grad = xs.transpose() * resid / n;
  double worst = resid.colwise().sum().cwiseAbs().maxCoeff() / n;
  for (Index a = 0; a < grad.rows(); ++a) {
    const auto j = s.kept[static_cast<std::size_t>(a)];
    for (Index k = 0; k < grad.cols(); ++k) {
      worst = std::max(worst, detail::kkt_residual(grad(a, k), fit.beta(j, k) * s.scale(j), pen));
    }
  }
  return worst;
}

/// Mean multinomial negative log-likelihood of (intercept, beta) on `x`.
inline double multinomial_loss(const Matrix& x, const CategoricalResponse& y, const Vector& intercept,
                               const Matrix& beta) {
  Matrix eta = x * beta;
  eta.rowwise() += intercept.transpose();
  Matrix prob;
  detail::softmax_rows(eta, prob);
  return detail::multinomial_nll(prob, y.codes);
}

/// Gradient of multinomial_loss with respect to beta: −(1/n) Xᵀ(Y − P).
inline Matrix multinomial_loss_gradient(const Matrix& x, const CategoricalResponse& y,
                                        const Vector& intercept, const Matrix& beta) {
  Matrix eta = x * beta;
  eta.rowwise() += intercept.transpose();
  Matrix prob;
  detail::softmax_rows(eta, prob);
  return -x.transpose() * (detail::one_hot(y) - prob) / static_cast<double>(x.rows());
}

namespace detail {

inline std::vector<int> assign_folds(std::size_t n, std::size_t folds, SeededStream& stream) {
  const auto perm = stream.permutation(n);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = static_cast<int>(i % folds);
  return fold_of;
}

inline Matrix take_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = x.row(rows[r]);
  return out;
}

}  // namespace detail

/// K-fold cross-validation over a shared penalty grid.
///
/// Observations are split by a seeded random permutation into `folds`
/// near-equal folds. The loss is squared error (gaussian) or the multinomial
/// negative log-likelihood, averaged over all held-out observations; the
/// standard error follows from the spread of per-fold means. lambda_min is
/// the first grid value attaining the smallest loss.
inline CvResult cross_validate(const DesignSpec& design, double alpha, std::size_t folds,
                               SeededStream& stream,
                               const std::optional<Vector>& grid = std::nullopt,
                               const SolverControl& ctl = {}) {
  detail::validate(design);
  const auto n = static_cast<std::size_t>(design.x.rows());
  if (folds < 3 || folds > n) {
    throw InvalidArgument("cross-validation needs between 3 and n folds, got " +
                          std::to_string(folds));
  }
  const std::size_t largest_fold = (n + folds - 1) / folds;
  if (n - largest_fold < 2) throw InvalidArgument("cross-validation training set has fewer than 2 observations");

  CvResult out;
  out.lambda_grid = grid ? *grid : lambda_grid(design, alpha);
  const Index nl = out.lambda_grid.size();
  out.fold_of = detail::assign_folds(n, folds, stream);
  std::vector<std::vector<Index>> members(folds);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(out.fold_of[i])].push_back(static_cast<Index>(i));

  Matrix fold_mean(static_cast<Index>(folds), nl);
  Vector total = Vector::Zero(nl);
  const Index d = design.x.cols();

  if (const auto* y = std::get_if<Vector>(&design.y)) {
    const Vector centre = design.x.colwise().mean().transpose();
    const double y_centre = y->mean();
    const Matrix xc = design.x.rowwise() - centre.transpose();
    const Vector yc = y->array() - y_centre;
    const auto full = detail::raw_moments(xc, yc);
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& rows = members[f];
      const Matrix x_hold = detail::take_rows(xc, rows);
      Vector y_hold(static_cast<Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) y_hold(static_cast<Index>(r)) = yc(rows[r]);
      const auto train = full - detail::raw_moments(x_hold, y_hold);
      const auto prob = detail::gaussian_problem(train, centre, y_centre, design.standardize);
      detail::GaussianCd cd(prob.gram, prob.xty, prob.y_var);
      const Matrix x_orig = detail::take_rows(design.x, rows);
      Vector y_orig(static_cast<Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) y_orig(static_cast<Index>(r)) = (*y)(rows[r]);
      for (Index k = 0; k < nl; ++k) {
        cd.solve(detail::make_penalty(out.lambda_grid(k), alpha), ctl);
        const auto fit = detail::gaussian_fit(prob, cd, d, out.lambda_grid(k), alpha);
        const Vector pred = predict(fit, x_orig).col(0);
        const double sse = (y_orig - pred).squaredNorm();
        total(k) += sse;
        fold_mean(static_cast<Index>(f), k) = sse / static_cast<double>(rows.size());
      }
    }
  } else {
    const auto& c = std::get<CategoricalResponse>(design.y);
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& rows = members[f];
      std::vector<char> held(n, 0);
      for (const auto r : rows) held[static_cast<std::size_t>(r)] = 1;
      std::vector<Index> train_rows;
      CategoricalResponse train_y{{}, c.levels};
      for (std::size_t i = 0; i < n; ++i) {
        if (!held[i]) {
          train_rows.push_back(static_cast<Index>(i));
          train_y.codes.push_back(c.codes[i]);
        }
      }
      auto path = detail::multinomial_path(detail::take_rows(design.x, train_rows), train_y,
                                           design.standardize);
      const Matrix x_hold = detail::take_rows(design.x, rows);
      for (Index k = 0; k < nl; ++k) {
        if (path.cd) path.cd->solve(detail::make_penalty(out.lambda_grid(k), alpha), ctl);
        const Matrix prob = predict(path.snapshot(out.lambda_grid(k), alpha), x_hold);
        double loss = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const int label = c.codes[static_cast<std::size_t>(rows[r])];
          loss -= std::log(std::max(prob(static_cast<Index>(r), label), 1e-15));
        }
        total(k) += loss;
        fold_mean(static_cast<Index>(f), k) = loss / static_cast<double>(rows.size());
      }
    }
  }

  out.cv_loss = total / static_cast<double>(n);
  out.cv_se.resize(nl);
  for (Index k = 0; k < nl; ++k) {
    double acc = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const double diff = fold_mean(static_cast<Index>(f), k) - out.cv_loss(k);
      acc += static_cast<double>(members[f].size()) * diff * diff;
    }
    out.cv_se(k) = std::sqrt(acc / static_cast<double>(n) / static_cast<double>(folds - 1));
  }
  Index best = 0;
  for (Index k = 1; k < nl; ++k) {
    if (out.cv_loss(k) < out.cv_loss(best)) best = k;
  }
  out.index_min = static_cast<std::size_t>(best);
  out.lambda_min = out.lambda_grid(best);
  return out;
}

/// Cross-validate, then fit the full data down the grid to lambda_min.
inline CvFit fit_cv(const DesignSpec& design, double alpha, std::size_t folds, SeededStream& stream,
                    const SolverControl& ctl = {}) {
  CvFit out;
  out.cv = cross_validate(design, alpha, folds, stream, std::nullopt, ctl);
  const Vector head = out.cv.lambda_grid.head(static_cast<Index>(out.cv.index_min) + 1);
  auto fits = fit_path(design, alpha, head, ctl);
  out.fit = std::move(fits.back());
  return out;
}

}  // namespace seqknock
