#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqknock/detail/solver_control.hpp"
#include "seqknock/errors.hpp"

namespace seqknock::detail {

/// Row-wise softmax of `eta` into `prob`.
inline void softmax_rows(const Eigen::MatrixXd& eta, Eigen::MatrixXd& prob) {
  prob.resize(eta.rows(), eta.cols());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double top = eta.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < eta.cols(); ++k) {
      prob(i, k) = std::exp(eta(i, k) - top);
      total += prob(i, k);
    }
    prob.row(i) /= total;
  }
}

/// Mean negative log-likelihood −(1/n) Σ log p_{i, y_i}.
inline double multinomial_nll(const Eigen::MatrixXd& prob, const std::vector<int>& codes) {
  double total = 0.0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    total -= std::log(std::max(prob(static_cast<Eigen::Index>(i), codes[i]), 1e-300));
  }
  return total / static_cast<double>(codes.size());
}

/// Shift c minimising Σ_k [l2 (v_k − c)²/2 + l1 |v_k − c|]. Returns 0 when no
/// shift strictly improves on the current values.
inline double penalty_optimal_shift(const Eigen::VectorXd& values, Penalty pen) {
  const auto cost = [&](double c) {
    double f = 0.0;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      const double r = values(k) - c;
      f += 0.5 * pen.l2 * r * r + pen.l1 * std::abs(r);
    }
    return f;
  };
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> candidates = sorted;
  const auto K = static_cast<double>(sorted.size());
  if (pen.l2 > 0.0) {
    const double total = values.sum();
    for (std::size_t below = 0; below <= sorted.size(); ++below) {
      const double above = K - static_cast<double>(below);
      const double c = (pen.l2 * total - pen.l1 * (static_cast<double>(below) - above)) / (pen.l2 * K);
      const double lo = below == 0 ? -std::numeric_limits<double>::infinity() : sorted[below - 1];
      const double hi = below == sorted.size() ? std::numeric_limits<double>::infinity() : sorted[below];
      if (c > lo && c < hi) candidates.push_back(c);
    }
  }
  double best = 0.0;
  double best_cost = cost(0.0);
  for (const double c : candidates) {
    const double f = cost(c);
    if (f < best_cost - 1e-15 * std::max(1.0, best_cost)) {
      best = c;
      best_cost = f;
    }
  }
  return best;
}

/// Penalised multinomial logistic regression with the symmetric
/// parameterisation: one coefficient column and intercept per class.
///
/// K = 2 is solved as one binary logistic block: each outer iteration forms
/// the quadratic approximation of the log-likelihood (weights p(1−p), floored
/// at 1e-5) as a weighted Gram matrix, so coordinate-descent passes cost
/// O(s²) rather than O(n s); the Gram is reused while the weights stay within
/// 2% of those it was built from. For K > 2 the approximation covers all
/// classes jointly, cross-class curvature included. Either way the step is
/// halved until the true objective does not increase. For K > 2 each
/// coefficient row and the intercepts are then shifted by the amount that
/// minimises the penalty, which leaves the likelihood unchanged.
///
/// Coordinates are restricted to a strong set screened from the previous
/// solution's gradient; any KKT violators outside it are added and the solve
/// repeats. All classes must be present in the response.
class MultinomialCd {
 public:
  MultinomialCd(Eigen::MatrixXd xs, std::vector<int> codes, int classes)
      : x_(std::move(xs)), codes_(std::move(codes)), classes_(classes) {
    const Eigen::Index n = x_.rows();
    n_ = static_cast<double>(n);
    y_.setZero(n, classes_);
    for (Eigen::Index i = 0; i < n; ++i) y_(i, codes_[static_cast<std::size_t>(i)]) = 1.0;
    const Eigen::VectorXd freq = y_.colwise().mean().transpose();
    b0_.resize(classes_);
    for (int k = 0; k < classes_; ++k) b0_(k) = std::log(std::max(freq(k), 1e-12));
    b0_.array() -= b0_.mean();
    beta_.setZero(x_.cols(), classes_);
    eta_ = Eigen::VectorXd::Ones(n) * b0_.transpose();
    softmax_rows(eta_, prob_);
    in_strong_.assign(static_cast<std::size_t>(x_.cols()), 0);
  }

  void solve(Penalty pen, const SolverControl& ctl) {
    cycles_ = 0;
    if (prev_l1_ < 0.0) prev_l1_ = pen.l1;
    Eigen::MatrixXd grad = gradient();
    const double screen = 2.0 * pen.l1 - prev_l1_;
    std::vector<Eigen::Index> strong;
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      const bool keep = in_strong_[static_cast<std::size_t>(j)] ||
                        beta_.row(j).cwiseAbs().maxCoeff() > 0.0 ||
                        grad.row(j).cwiseAbs().maxCoeff() >= screen;
      if (keep) add_strong(j, strong);
    }
    while (true) {
      solve_restricted(strong, pen, ctl);
      grad = gradient();
      bool violated = false;
      for (Eigen::Index j = 0; j < x_.cols(); ++j) {
        if (in_strong_[static_cast<std::size_t>(j)]) continue;
        if (grad.row(j).cwiseAbs().maxCoeff() > pen.l1 + ctl.kkt_tolerance) {
          add_strong(j, strong);
          violated = true;
        }
      }
      if (!violated) break;
    }
    prev_l1_ = pen.l1;
  }

  [[nodiscard]] const Eigen::MatrixXd& beta() const { return beta_; }
  [[nodiscard]] const Eigen::VectorXd& intercept() const { return b0_; }
  [[nodiscard]] const Eigen::MatrixXd& probabilities() const { return prob_; }
  [[nodiscard]] std::size_t cycles() const { return cycles_; }

  /// (1/n) X̃ᵀ(Y − P): the negated gradient of the mean log-loss.
  [[nodiscard]] Eigen::MatrixXd gradient() const {
    return x_.transpose() * (y_ - prob_) / n_;
  }

  [[nodiscard]] double objective(Penalty pen) const {
    return multinomial_nll(prob_, codes_) + penalty_value(beta_, pen);
  }

  [[nodiscard]] double max_kkt(Penalty pen) const {
    const Eigen::MatrixXd grad = gradient();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta_.rows(); ++j) {
      for (int k = 0; k < classes_; ++k) {
        worst = std::max(worst, kkt_residual(grad(j, k), beta_(j, k), pen));
      }
    }
    return worst;
  }

 private:
  struct WeightedGram {
    bool valid = false;
    Eigen::VectorXd w, h0;
    Eigen::MatrixXd hess;
    double h00 = 0.0;
  };

  static constexpr std::size_t kPolishEvery = 4;
  static constexpr double kWeightDrift = 0.02;

  // Exact minimiser of the quadratic model on the current sign pattern of b,
  // with the intercept free; kept only if no sign flips and the model value
  // drops. g, g0 are the model's negated gradients at the current point.
  static void polish_quadratic(const Eigen::MatrixXd& hess, const Eigen::VectorXd& h0, double h00,
                               Penalty pen, Eigen::VectorXd& b, Eigen::VectorXd& g, double& g0,
                               double& b0_step) {
    std::vector<Eigen::Index> nz;
    for (Eigen::Index a = 0; a < b.size(); ++a) {
      if (b(a) != 0.0) nz.push_back(a);
    }
    const auto m = static_cast<Eigen::Index>(nz.size());
    // Unknowns: moves of the nonzero coefficients, then the intercept move.
    Eigen::MatrixXd h(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) h(i, j) = hess(nz[i], nz[j]);
      h(i, i) += pen.l2;
      h(i, m) = h(m, i) = h0(nz[i]);
      rhs(i) = g(nz[i]) - pen.l2 * b(nz[i]) - pen.l1 * sign(b(nz[i]));
    }
    h(m, m) = h00;
    rhs(m) = g0;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd move = ldlt.solve(rhs);
    if (!move.allFinite() || (h * move - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) return;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (sign(b(nz[i]) + move(i)) != sign(b(nz[i]))) return;
    }
    // Model decrease of the move: rhsᵀmove − ½ moveᵀ h move = ½ rhsᵀmove ≥ 0.
    if (!(rhs.dot(move) >= 0.0)) return;
    for (Eigen::Index i = 0; i < m; ++i) {
      b(nz[i]) += move(i);
      g.noalias() -= move(i) * hess.col(nz[i]);
      g0 -= move(i) * h0(nz[i]);
    }
    b0_step += move(m);
    g.noalias() -= move(m) * h0;
    g0 -= move(m) * h00;
  }

  // polish_quadratic for the joint layout of solve_joint. The first class's
  // intercept stays put: the intercepts only matter up to a common shift.
  static void polish_joint(const Eigen::MatrixXd& hess, Penalty pen, Eigen::Index m, Eigen::VectorXd& b,
                           Eigen::VectorXd& g) {
    std::vector<Eigen::Index> nz;
    for (Eigen::Index v = 0; v < b.size(); ++v) {
      const bool intercept = v % m == m - 1;
      if ((intercept && v >= m) || (!intercept && b(v) != 0.0)) nz.push_back(v);
    }
    const auto r = static_cast<Eigen::Index>(nz.size());
    Eigen::MatrixXd h(r, r);
    Eigen::VectorXd rhs(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) h(i, j) = hess(nz[i], nz[j]);
      const bool intercept = nz[i] % m == m - 1;
      rhs(i) = g(nz[i]);
      if (!intercept) {
        h(i, i) += pen.l2;
        rhs(i) -= pen.l2 * b(nz[i]) + pen.l1 * sign(b(nz[i]));
      }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd move = ldlt.solve(rhs);
    if (!move.allFinite() || (h * move - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) return;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (nz[i] % m != m - 1 && sign(b(nz[i]) + move(i)) != sign(b(nz[i]))) return;
    }
    if (!(rhs.dot(move) >= 0.0)) return;
    for (Eigen::Index i = 0; i < r; ++i) {
      b(nz[i]) += move(i);
      g.noalias() -= move(i) * hess.col(nz[i]);
    }
  }

  static double penalty_value(const Eigen::MatrixXd& b, Penalty pen) {
    return 0.5 * pen.l2 * b.squaredNorm() + pen.l1 * b.cwiseAbs().sum();
  }

  void add_strong(Eigen::Index j, std::vector<Eigen::Index>& strong) {
    if (in_strong_[static_cast<std::size_t>(j)]) {
      if (std::find(strong.begin(), strong.end(), j) == strong.end()) strong.push_back(j);
      return;
    }
    in_strong_[static_cast<std::size_t>(j)] = 1;
    strong.push_back(j);
  }

  // With K = 2 the symmetric problem is a binary logistic regression in
  // b = β₂ − β₁ with penalty l1 |b| + (l2/4) b²: the optimum has β₁ = −β₂.
  // One block update on b then replaces two mirrored class updates.
  void solve_restricted(const std::vector<Eigen::Index>& strong, Penalty pen,
                        const SolverControl& ctl) {
    const Eigen::Index n = x_.rows();
    const auto s = static_cast<Eigen::Index>(strong.size());
    Eigen::MatrixXd xs(n, s);
    for (Eigen::Index a = 0; a < s; ++a) xs.col(a) = x_.col(strong[static_cast<std::size_t>(a)]);

    const bool binary = classes_ == 2;
    if (!binary) {
      solve_joint(xs, strong, pen, ctl);
      return;
    }
    const int first_block = binary ? 1 : 0;
    const double unit = binary ? 2.0 : 1.0;  // block coefficient per stored coefficient
    const Penalty block_pen = binary ? Penalty{pen.l1, 0.5 * pen.l2} : pen;
    const auto block_penalty = [&](double v) { return 0.5 * block_pen.l2 * v * v + block_pen.l1 * std::abs(v); };

    Eigen::VectorXd w(n), wr(n), b(s), b_old(s), g(s), d_eta(n);
    Eigen::MatrixXd xw(n, s), trial_eta, trial_prob;
    if (grams_.empty() || gram_columns_ != strong) {
      grams_.assign(static_cast<std::size_t>(classes_), WeightedGram{});
      gram_columns_ = strong;
    }
    double current = objective(pen);

    while (true) {
      double max_change = 0.0;
      for (int k = first_block; k < classes_; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double p = prob_(i, k);
          w(i) = std::max(p * (1.0 - p), 1e-5);
          wr(i) = y_(i, k) - p;
        }
        // Weighted Gram of the strong columns and the intercept, rebuilt when
        // some weight has moved by more than kWeightDrift relative to the one
        // it was built with. The line search covers a slightly stale model.
        auto& gram = grams_[static_cast<std::size_t>(k)];
        if (!gram.valid || ((w - gram.w).array().abs() > kWeightDrift * gram.w.array()).any()) {
          xw = xs.array().colwise() * w.array().sqrt();
          gram.hess.setZero(s, s);
          gram.hess.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose(), 1.0 / n_);
          gram.hess.triangularView<Eigen::StrictlyUpper>() = gram.hess.transpose();
          gram.h0.noalias() = xs.transpose() * w / n_;
          gram.h00 = w.sum() / n_;
          gram.w = w;
          gram.valid = true;
        }
        const Eigen::MatrixXd& hess = gram.hess;
        const Eigen::VectorXd& h0 = gram.h0;
        const double h00 = gram.h00;
        g.noalias() = xs.transpose() * wr / n_;
        double g0 = wr.sum() / n_;
        for (Eigen::Index a = 0; a < s; ++a) b(a) = unit * beta_(strong[static_cast<std::size_t>(a)], k);
        b_old = b;
        double b0_step = 0.0;
        std::size_t passes = 0;

        while (true) {
          double delta = 0.0;
          for (Eigen::Index a = 0; a < s; ++a) {
            const double haa = hess(a, a);
            const double fresh = soft_threshold(g(a) + haa * b(a), block_pen.l1) / (haa + block_pen.l2);
            const double diff = fresh - b(a);
            if (diff != 0.0) {
              b(a) = fresh;
              g.noalias() -= diff * hess.col(a);
              g0 -= diff * h0(a);
              delta = std::max(delta, std::abs(diff));
            }
          }
          const double shift = g0 / h00;
          b0_step += shift;
          g.noalias() -= shift * h0;
          g0 = 0.0;
          delta = std::max(delta, std::abs(shift));
          ++cycles_;
          if (delta < 0.1 * ctl.tolerance) break;
          if (++passes % kPolishEvery == 0) polish_quadratic(hess, h0, h00, block_pen, b, g, g0, b0_step);
          check_budget(ctl);
        }

        // Damped step on the true objective.
        const Eigen::VectorXd step = b - b_old;
        d_eta.noalias() = xs * step;
        d_eta.array() += b0_step;
        double base_pen = 0.0, step_scale = 1.0;
        for (Eigen::Index a = 0; a < s; ++a) base_pen += block_penalty(b_old(a));
        const double other_pen = penalty_value(beta_, pen) - base_pen;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving) {
          trial_eta = eta_;
          trial_eta.col(k) += (step_scale / unit) * d_eta;
          if (binary) trial_eta.col(0) -= (step_scale / unit) * d_eta;
          softmax_rows(trial_eta, trial_prob);
          double pen_k = 0.0;
          for (Eigen::Index a = 0; a < s; ++a) pen_k += block_penalty(b_old(a) + step_scale * step(a));
          const double value = multinomial_nll(trial_prob, codes_) + other_pen + pen_k;
          if (value <= current + 1e-13 * std::max(1.0, std::abs(current))) {
            accepted = true;
            current = value;
            break;
          }
          step_scale *= 0.5;
        }
        if (!accepted) continue;
        for (Eigen::Index a = 0; a < s; ++a) {
          const double v = (b_old(a) + step_scale * step(a)) / unit;
          beta_(strong[static_cast<std::size_t>(a)], k) = v;
          if (binary) beta_(strong[static_cast<std::size_t>(a)], 0) = -v;
        }
        b0_(k) += step_scale * b0_step / unit;
        if (binary) b0_(0) = -b0_(k);
        eta_.swap(trial_eta);
        prob_.swap(trial_prob);
        const double moved = s > 0 ? step.cwiseAbs().maxCoeff() : 0.0;
        max_change = std::max(max_change, std::max(step_scale * moved, step_scale * std::abs(b0_step)) / unit);
      }

      if (!binary) recentre(strong, pen);
      current = objective(pen);
      if (ctl.cycle_observer) ctl.cycle_observer(current);
      if (max_change < ctl.tolerance && restricted_kkt(xs, strong, pen) < ctl.kkt_tolerance) return;
      check_budget(ctl);
    }
  }

  // K > 2: proximal Newton over all classes at once. Class-at-a-time steps
  // ignore the cross-class curvature −p_k p_l and crawl once the fit is
  // nearly saturated. Variables are laid out class by class as the strong
  // coefficients followed by the intercept.
  void solve_joint(const Eigen::MatrixXd& xs, const std::vector<Eigen::Index>& strong, Penalty pen,
                   const SolverControl& ctl) {
    const Eigen::Index n = x_.rows();
    const auto s = static_cast<Eigen::Index>(strong.size());
    const Eigen::Index m = s + 1;
    const Eigen::Index dim = m * classes_;
    Eigen::MatrixXd xa(n, m);
    xa << xs, Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd hess(dim, dim), xw(n, m), trial_eta, trial_prob, move(m, classes_);
    Eigen::VectorXd w(n), g(dim), b(dim), b_old(dim), row(classes_), hd(dim);
    // Row curvature diag(p) − ppᵀ + ε(I − 11ᵀ/K): the ridge keeps the common
    // shift an exact null direction, which a diagonal floor would not.
    constexpr double kFloor = 1e-5;
    double current = objective(pen);
    double strong_pen = 0.0;

    while (true) {
      for (int k = 0; k < classes_; ++k) {
        for (int l = 0; l <= k; ++l) {
          for (Eigen::Index i = 0; i < n; ++i) {
            w(i) = (k == l ? prob_(i, k) - kFloor / classes_ + kFloor : -kFloor / classes_) - prob_(i, k) * prob_(i, l);
          }
          xw = xa.array().colwise() * w.array();
          hess.block(k * m, l * m, m, m).noalias() = xa.transpose() * xw / n_;
          if (l != k) hess.block(l * m, k * m, m, m) = hess.block(k * m, l * m, m, m).transpose();
        }
      }
      const Eigen::MatrixXd grad = xa.transpose() * (y_ - prob_) / n_;
      strong_pen = 0.0;
      for (int k = 0; k < classes_; ++k) {
        g.segment(k * m, m) = grad.col(k);
        for (Eigen::Index a = 0; a < s; ++a) b(k * m + a) = beta_(strong[static_cast<std::size_t>(a)], k);
        b(k * m + s) = b0_(k);
      }
      b_old = b;
      std::size_t passes = 0;
      for (Eigen::Index a = 0; a < s; ++a) strong_pen += penalty_value(beta_.row(strong[static_cast<std::size_t>(a)]), pen);

      while (true) {
        double delta = 0.0;
        for (Eigen::Index v = 0; v < dim; ++v) {
          const double h = hess(v, v);
          const double fresh = v % m == s ? b(v) + g(v) / h : soft_threshold(g(v) + h * b(v), pen.l1) / (h + pen.l2);
          const double diff = fresh - b(v);
          if (diff != 0.0) {
            b(v) = fresh;
            g.noalias() -= diff * hess.col(v);
            delta = std::max(delta, std::abs(diff));
          }
        }
        ++cycles_;
        if (delta < 0.1 * ctl.tolerance) break;
        if (++passes % kPolishEvery == 0) polish_joint(hess, pen, m, b, g);
        // The model is nearly flat along a common shift of one coefficient
        // row; coordinate moves cannot follow that direction, so take the
        // penalty-optimal shift whenever it lowers the model.
        for (Eigen::Index a = 0; a < s; ++a) {
          for (int k = 0; k < classes_; ++k) row(k) = b(k * m + a);
          const double c = penalty_optimal_shift(row, pen);
          if (c == 0.0) continue;
          hd.setZero();
          double gd = 0.0, dhd = 0.0;
          for (int k = 0; k < classes_; ++k) {
            hd.noalias() -= c * hess.col(k * m + a);
            gd -= c * g(k * m + a);
          }
          for (int k = 0; k < classes_; ++k) dhd -= c * hd(k * m + a);
          const double change = -gd + 0.5 * dhd + penalty_value((row.array() - c).matrix().transpose(), pen) -
                                penalty_value(row.transpose(), pen);
          if (change < 0.0) {
            for (int k = 0; k < classes_; ++k) b(k * m + a) -= c;
            g -= hd;
          }
        }
        check_budget(ctl);
      }

      // Damped step on the true objective.
      for (int k = 0; k < classes_; ++k) move.col(k) = (b - b_old).segment(k * m, m);
      const Eigen::MatrixXd d_eta = xa * move;
      const double other_pen = penalty_value(beta_, pen) - strong_pen;
      double step_scale = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 40; ++halving) {
        trial_eta = eta_ + step_scale * d_eta;
        softmax_rows(trial_eta, trial_prob);
        double pen_s = 0.0;
        for (Eigen::Index a = 0; a < s; ++a) pen_s += penalty_value((move.row(a) * step_scale + beta_.row(strong[static_cast<std::size_t>(a)])), pen);
        const double value = multinomial_nll(trial_prob, codes_) + other_pen + pen_s;
        if (value <= current + 1e-13 * std::max(1.0, std::abs(current))) {
          accepted = true;
          break;
        }
        step_scale *= 0.5;
      }
      double max_change = 0.0;
      if (accepted) {
        for (Eigen::Index a = 0; a < s; ++a) beta_.row(strong[static_cast<std::size_t>(a)]) += step_scale * move.row(a);
        b0_ += step_scale * move.row(s).transpose();
        eta_.swap(trial_eta);
        prob_.swap(trial_prob);
        max_change = step_scale * move.cwiseAbs().maxCoeff();
      }
      recentre(strong, pen);
      current = objective(pen);
      if (ctl.cycle_observer) ctl.cycle_observer(current);
      if (max_change < ctl.tolerance && restricted_kkt(xs, strong, pen) < ctl.kkt_tolerance) return;
      check_budget(ctl);
    }
  }

  double restricted_kkt(const Eigen::MatrixXd& xs, const std::vector<Eigen::Index>& strong,
                        Penalty pen) const {
    const Eigen::MatrixXd resid = y_ - prob_;
    const Eigen::MatrixXd grad = xs.transpose() * resid / n_;
    double worst = resid.colwise().sum().cwiseAbs().maxCoeff() / n_;
    for (Eigen::Index a = 0; a < grad.rows(); ++a) {
      for (int k = 0; k < classes_; ++k) {
        worst = std::max(worst,
                         kkt_residual(grad(a, k), beta_(strong[static_cast<std::size_t>(a)], k), pen));
      }
    }
    return worst;
  }

  void recentre(const std::vector<Eigen::Index>& strong, Penalty pen) {
    for (const auto j : strong) {
      const Eigen::VectorXd row = beta_.row(j).transpose();
      const double c = penalty_optimal_shift(row, pen);
      if (c != 0.0) {
        beta_.row(j).array() -= c;
        eta_.colwise() -= c * x_.col(j);
      }
    }
    const double mid = b0_.mean();
    b0_.array() -= mid;
    eta_.array() -= mid;
  }

  void check_budget(const SolverControl& ctl) const {
    if (cycles_ >= ctl.max_cycles) {
      throw NonConvergence("elastic net (multinomial) did not converge within " +
                           std::to_string(ctl.max_cycles) + " cycles");
    }
  }

  Eigen::MatrixXd x_;
  std::vector<int> codes_;
  int classes_;
  double n_ = 0.0;
  Eigen::MatrixXd y_;
  Eigen::MatrixXd beta_;
  Eigen::VectorXd b0_;
  Eigen::MatrixXd eta_;
  Eigen::MatrixXd prob_;
  std::vector<char> in_strong_;
  std::vector<Eigen::Index> gram_columns_;  // columns the cached weighted Grams cover
  std::vector<WeightedGram> grams_;
  double prev_l1_ = -1.0;
  std::size_t cycles_ = 0;
};

}  // namespace seqknock::detail
