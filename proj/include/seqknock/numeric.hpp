#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "seqknock/errors.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class CovarianceKind { independent, equicorrelated, ar1 };

inline std::string to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::independent: return "independent";
    case CovarianceKind::equicorrelated: return "equicorrelated";
    case CovarianceKind::ar1: return "ar1";
  }
  return "unknown";
}

inline CovarianceKind covariance_kind_from_string(const std::string& name) {
  if (name == "independent") return CovarianceKind::independent;
  if (name == "equicorrelated" || name == "equi") return CovarianceKind::equicorrelated;
  if (name == "ar1" || name == "AR1") return CovarianceKind::ar1;
  throw InvalidArgument("unknown covariance kind '" + name + "'");
}

struct CovarianceSpec {
  std::size_t p = 1;
  CovarianceKind kind = CovarianceKind::independent;
  double rho = 0.0;  // ignored for independent
  double scale = 1.0;
};

/// Realise the covariance matrix described by `spec`.
///
/// The independent form is the identity scaled by `spec.scale`. Throws
/// InvalidArgument when rho falls outside the positive-definite range of the
/// requested structure.
inline Matrix covariance_matrix(const CovarianceSpec& spec) {
  const auto p = static_cast<Index>(spec.p);
  if (p < 1) throw InvalidArgument("covariance dimension must be positive");
  if (!(spec.scale > 0.0)) throw InvalidArgument("covariance scale must be positive");
  Matrix sigma = Matrix::Identity(p, p);
  if (spec.kind != CovarianceKind::independent) {
    if (!(spec.rho > -1.0 && spec.rho < 1.0)) {
      throw InvalidArgument("rho must lie in (-1, 1), got " + std::to_string(spec.rho));
    }
  }
  switch (spec.kind) {
    case CovarianceKind::independent:
      break;
    case CovarianceKind::equicorrelated:
      if (p > 1 && !(spec.rho > -1.0 / static_cast<double>(p - 1))) {
        throw InvalidArgument("equicorrelated rho=" + std::to_string(spec.rho) +
                              " is below the positive-definite bound -1/(p-1)");
      }
      sigma.setConstant(spec.rho);
      sigma.diagonal().setOnes();
      break;
    case CovarianceKind::ar1:
      for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
          sigma(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
        }
      }
      break;
  }
  return sigma * spec.scale;
}

/// Lower Cholesky factor L with L Lᵀ = `a`.
///
/// Requires symmetry within 1e-10 relative (Frobenius) tolerance. Throws
/// NotPositiveDefinite when any pivot L_jj² falls to 1e-12 times the largest
/// diagonal entry or below.
inline Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky needs a square matrix");
  if (a.rows() == 0) return Matrix(0, 0);
  const double norm = a.norm();
  if ((a - a.transpose()).norm() > 1e-10 * std::max(norm, 1e-300)) {
    throw InvalidArgument("cholesky input is not symmetric");
  }
  const double max_diag = a.diagonal().maxCoeff();
  const double floor = 1e-12 * max_diag;
  if (!(max_diag > 0.0)) throw NotPositiveDefinite("matrix has no positive diagonal entry");

  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("Cholesky factorisation failed: matrix is not positive definite");
  }
  Matrix l = llt.matrixL();
  for (Index j = 0; j < l.rows(); ++j) {
    if (!(l(j, j) * l(j, j) > floor)) {
      throw NotPositiveDefinite("Cholesky pivot " + std::to_string(j) +
                                " is below the relative floor 1e-12");
    }
  }
  return l;
}

/// Draw `n` rows from N(mean, L Lᵀ); returns an n×p matrix.
///
/// Row i consumes p consecutive standard normals from `stream`.
inline Matrix sample_mvn(SeededStream& stream, const Vector& mean, const Matrix& chol,
                         std::size_t n) {
  const Index p = mean.size();
  if (chol.rows() != p || chol.cols() != p) {
    throw DimensionMismatch("sample_mvn: factor is " + std::to_string(chol.rows()) + "x" +
                            std::to_string(chol.cols()) + " but mean has length " +
                            std::to_string(p));
  }
  Matrix z(static_cast<Index>(n), p);
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = stream.normal();
  }
  Matrix out = z * chol.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

inline double normal_quantile(double prob) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, prob);
}

inline double normal_cdf(double x) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::cdf(standard, x);
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

/// Rank-based normal scores Φ⁻¹((rank − 0.5) / n) using average ranks for ties.
inline Vector normal_score_transform(std::span<const double> column) {
  const std::size_t n = column.size();
  if (n < 2) throw InvalidArgument("normal_score_transform needs at least 2 values");
  const auto ranks = average_ranks(column);
  Vector out(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    out(static_cast<Index>(i)) = normal_quantile((ranks[i] - 0.5) / static_cast<double>(n));
  }
  return out;
}

inline Vector normal_score_transform(const Vector& column) {
  return normal_score_transform(std::span<const double>(column.data(), column.size()));
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Sample covariance (1/(n−1) normalisation) of the columns of `x`.
inline Matrix sample_covariance(const Matrix& x) {
  if (x.rows() < 2) throw InvalidArgument("sample_covariance needs at least 2 rows");
  const Matrix centred = x.rowwise() - x.colwise().mean();
  return (centred.transpose() * centred) / static_cast<double>(x.rows() - 1);
}

}  // namespace seqknock
