#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqknock/detail/solver_control.hpp"
#include "seqknock/errors.hpp"

namespace seqknock::detail {

/// Cross-product statistics of (X, y) about a fixed centre.
struct RawMoments {
  double count = 0.0;
  Eigen::VectorXd sx;
  Eigen::MatrixXd sxx;
  double sy = 0.0;
  double syy = 0.0;
  Eigen::VectorXd sxy;

  RawMoments operator-(const RawMoments& o) const {
    return {count - o.count, sx - o.sx, sxx - o.sxx, sy - o.sy, syy - o.syy, sxy - o.sxy};
  }
};

/// Moments of already-centred data.
inline RawMoments raw_moments(const Eigen::MatrixXd& xc, const Eigen::VectorXd& yc) {
  RawMoments m;
  m.count = static_cast<double>(xc.rows());
  m.sx = xc.colwise().sum().transpose();
  m.sxx.setZero(xc.cols(), xc.cols());
  m.sxx.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
  m.sxx.triangularView<Eigen::StrictlyUpper>() = m.sxx.transpose();
  m.sy = yc.sum();
  m.syy = yc.squaredNorm();
  m.sxy = xc.transpose() * yc;
  return m;
}

/// Least-squares problem in standardised coordinates, restricted to
/// non-constant columns.
struct GaussianProblem {
  double n = 0.0;
  std::vector<Eigen::Index> kept;  // original column indices
  Eigen::VectorXd mean;            // per original column
  Eigen::VectorXd scale;           // per original column, 0 for dropped
  Eigen::MatrixXd gram;            // kept × kept, (1/n) X̃ᵀX̃
  Eigen::VectorXd xty;             // (1/n) X̃ᵀ(y − ȳ)
  double y_mean = 0.0;
  double y_var = 0.0;              // (1/n) Σ (y − ȳ)²
};

/// Standardise moments taken about centres `x_centre`, `y_centre`.
inline GaussianProblem gaussian_problem(const RawMoments& m, const Eigen::VectorXd& x_centre,
                                        double y_centre, bool standardize) {
  GaussianProblem prob;
  const Eigen::Index d = m.sx.size();
  const double n = m.count;
  prob.n = n;
  const Eigen::VectorXd mu = m.sx / n;  // relative to the centre
  prob.mean = x_centre + mu;
  prob.scale = Eigen::VectorXd::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double second = m.sxx(j, j) / n;
    const double var = second - mu(j) * mu(j);
    if (var > 1e-13 * second && var > 1e-300) {
      prob.kept.push_back(j);
      prob.scale(j) = standardize ? std::sqrt(var) : 1.0;
    }
  }
  const auto k = static_cast<Eigen::Index>(prob.kept.size());
  const double ybar = m.sy / n;
  prob.y_mean = y_centre + ybar;
  prob.y_var = std::max(0.0, m.syy / n - ybar * ybar);
  prob.gram.resize(k, k);
  prob.xty.resize(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto ja = prob.kept[static_cast<std::size_t>(a)];
    const double sa = prob.scale(ja);
    for (Eigen::Index b = 0; b <= a; ++b) {
      const auto jb = prob.kept[static_cast<std::size_t>(b)];
      const double cov = m.sxx(ja, jb) / n - mu(ja) * mu(jb);
      prob.gram(a, b) = prob.gram(b, a) = cov / (sa * prob.scale(jb));
    }
    if (standardize) prob.gram(a, a) = 1.0;
    prob.xty(a) = (m.sxy(ja) / n - mu(ja) * ybar) / sa;
  }
  return prob;
}

inline GaussianProblem gaussian_problem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        bool standardize) {
  const Eigen::VectorXd xc = x.colwise().mean().transpose();
  const double yc = y.mean();
  const Eigen::MatrixXd xs = x.rowwise() - xc.transpose();
  const Eigen::VectorXd ys = y.array() - yc;
  return gaussian_problem(raw_moments(xs, ys), xc, yc, standardize);
}

/// Cyclic coordinate descent on the covariance (Gram) form of the
/// elastic-net least-squares problem
///
///   ½ y_var − βᵀc + ½ βᵀGβ + l2 ‖β‖²/2 + l1 ‖β‖₁.
///
/// The gradient g = c − Gβ is kept exact by rank-one column updates, so a
/// cycle over d coordinates costs O(d) plus O(d) per coefficient that moves.
/// After a full cycle only the ever-active coordinates are iterated until they
/// settle; then a full cycle confirms. Warm starts carry over between solves.
class GaussianCd {
 public:
  GaussianCd(Eigen::MatrixXd gram, Eigen::VectorXd xty, double y_var)
      : gram_(std::move(gram)),
        xty_(std::move(xty)),
        y_var_(y_var),
        beta_(Eigen::VectorXd::Zero(xty_.size())),
        grad_(xty_),
        is_active_(static_cast<std::size_t>(xty_.size()), 0) {}

  /// Replace the cross-product vector, keeping coefficients as a warm start.
  void reset_response(const Eigen::VectorXd& xty, double y_var) {
    xty_ = xty;
    y_var_ = y_var;
    grad_ = xty_ - gram_ * beta_;
  }

  void reset_coefficients() {
    beta_.setZero();
    grad_ = xty_;
    active_.clear();
    std::fill(is_active_.begin(), is_active_.end(), 0);
  }

  void solve(Penalty pen, const SolverControl& ctl) {
    cycles_ = 0;
    const Eigen::Index d = beta_.size();
    if (d == 0) return;
    while (true) {
      double delta = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) delta = std::max(delta, update(j, pen));
      finish_cycle(pen, ctl);
      if (delta < ctl.tolerance && max_kkt(pen) < ctl.kkt_tolerance) return;
      check_budget(ctl);
      for (std::size_t pass = 1;; ++pass) {
        double inner = 0.0;
        for (const auto j : active_) inner = std::max(inner, update(j, pen));
        if (pass % kPolishEvery == 0) polish(pen);
        finish_cycle(pen, ctl);
        if (inner < ctl.tolerance) break;
        check_budget(ctl);
      }
    }
  }

  [[nodiscard]] const Eigen::VectorXd& beta() const { return beta_; }
  [[nodiscard]] const Eigen::VectorXd& gradient() const { return grad_; }
  [[nodiscard]] std::size_t cycles() const { return cycles_; }

  /// Penalised objective (1/2n)‖y − ȳ − X̃β‖² + penalty.
  [[nodiscard]] double objective(Penalty pen) const {
    return half_rss() + 0.5 * pen.l2 * beta_.squaredNorm() + pen.l1 * beta_.lpNorm<1>();
  }

  /// (1/2n) times the residual sum of squares.
  [[nodiscard]] double half_rss() const {
    return std::max(0.0, 0.5 * y_var_ - 0.5 * beta_.dot(xty_ + grad_));
  }

  [[nodiscard]] double max_kkt(Penalty pen) const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta_.size(); ++j) {
      worst = std::max(worst, kkt_residual(grad_(j), beta_(j), pen));
    }
    return worst;
  }

 private:
  static constexpr std::size_t kPolishEvery = 25;

  // Move to the minimiser of the quadratic on the current sign pattern, or as
  // far towards it as the signs allow. Ill-conditioned designs make plain
  // coordinate steps crawl; this never raises the objective.
  void polish(Penalty pen) {
    std::vector<Eigen::Index> nz;
    for (const auto j : active_) {
      if (beta_(j) != 0.0) nz.push_back(j);
    }
    const auto k = static_cast<Eigen::Index>(nz.size());
    if (k == 0) return;
    Eigen::MatrixXd h(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) h(a, b) = gram_(nz[a], nz[b]);
      h(a, a) += pen.l2;
      rhs(a) = xty_(nz[a]) - pen.l1 * sign(beta_(nz[a]));
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd b = ldlt.solve(rhs);
    if (!b.allFinite() || (h * b - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) return;
    // Step towards b, stopping where the first coefficient reaches zero. The
    // objective equals the convex quadratic along the whole segment, so any
    // step length in [0, 1] lowers it.
    double t = 1.0;
    Eigen::Index hit = -1;
    for (Eigen::Index a = 0; a < k; ++a) {
      const double cur = beta_(nz[a]);
      if (sign(b(a)) != sign(cur) && cur / (cur - b(a)) < t) {
        t = cur / (cur - b(a));
        hit = a;
      }
    }
    const Eigen::VectorXd old = beta_;
    const double before = objective(pen);
    for (Eigen::Index a = 0; a < k; ++a) beta_(nz[a]) += t * (b(a) - beta_(nz[a]));
    if (hit >= 0) beta_(nz[hit]) = 0.0;
    grad_ = xty_ - gram_ * beta_;
    if (objective(pen) > before) {
      beta_ = old;
      grad_ = xty_ - gram_ * beta_;
    }
  }

  double update(Eigen::Index j, Penalty pen) {
    const double gjj = gram_(j, j);
    const double old = beta_(j);
    const double fresh = soft_threshold(grad_(j) + gjj * old, pen.l1) / (gjj + pen.l2);
    const double diff = fresh - old;
    if (diff == 0.0) return 0.0;
    beta_(j) = fresh;
    grad_.noalias() -= diff * gram_.col(j);
    if (!is_active_[static_cast<std::size_t>(j)]) {
      is_active_[static_cast<std::size_t>(j)] = 1;
      active_.push_back(j);
    }
    return std::abs(diff);
  }

  void finish_cycle(Penalty pen, const SolverControl& ctl) {
    ++cycles_;
    if (ctl.cycle_observer) ctl.cycle_observer(objective(pen));
  }

  void check_budget(const SolverControl& ctl) const {
    if (cycles_ >= ctl.max_cycles) {
      throw NonConvergence("elastic net (gaussian) did not converge within " +
                           std::to_string(ctl.max_cycles) + " cycles");
    }
  }

  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
  double y_var_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd grad_;
  std::vector<Eigen::Index> active_;
  std::vector<char> is_active_;
  std::size_t cycles_ = 0;
};

}  // namespace seqknock::detail
