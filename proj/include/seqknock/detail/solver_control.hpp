#pragma once

#include <cstddef>
#include <cmath>
#include <functional>

namespace seqknock {

/// Convergence settings shared by the coordinate-descent solvers.
struct SolverControl {
  /// Converged when a full cycle moves no coefficient by more than this.
  double tolerance = 1e-7;
  /// Stationarity residual the final iterate must also meet.
  double kkt_tolerance = 1e-7;
  /// Cap on coordinate cycles per penalty value.
  std::size_t max_cycles = 10'000;
  /// Called with the penalised objective after every cycle when set.
  std::function<void(double)> cycle_observer;
};

namespace detail {

struct Penalty {
  double l1 = 0.0;  // lambda * alpha
  double l2 = 0.0;  // lambda * (1 - alpha)
};

inline Penalty make_penalty(double lambda, double alpha) {
  return {lambda * alpha, lambda * (1.0 - alpha)};
}

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline double sign(double x) { return (x > 0.0) - (x < 0.0); }

/// Distance of one coordinate from elastic-net stationarity given its
/// gradient `g` of the (negated) smooth loss.
inline double kkt_residual(double g, double beta, Penalty pen) {
  if (beta == 0.0) {
    const double excess = std::abs(g) - pen.l1;
    return excess > 0.0 ? excess : 0.0;
  }
  return std::abs(g - pen.l2 * beta - pen.l1 * sign(beta));
}

}  // namespace detail
}  // namespace seqknock
