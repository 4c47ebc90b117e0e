#pragma once

#include <array>
#include <cstddef>

#include "tou/model.hpp"
#include "tou/simulate.hpp"

namespace tou {

/// Per-side sums over left endpoints k = 0..N-1 with X_k on that side.
struct SideSums {
  std::array<double, 3> q{};  ///< dt * sum X_k^m,                m = 0, 1, 2
  std::array<double, 2> m{};  ///< sum X_k^m (X_{k+1} - X_k),      m = 0, 1
  double sumsq = 0.0;         ///< sum (X_{k+1} - X_k)^2
  std::size_t count = 0;

  /// q0 q2 - q1^2; nonnegative by Cauchy-Schwarz.
  double det() const noexcept { return q[0] * q[2] - q[1] * q[1]; }
};

/// Compensated accumulator producing SideSums.
class SideSumsBuilder {
 public:
  void add(double x, double dx) noexcept {
    q1_ += x;
    q2_ += x * x;
    m0_ += dx;
    m1_ += x * dx;
    sumsq_ += dx * dx;
    ++count_;
  }
  SideSums finish(double dt) const noexcept;

 private:
  CompensatedSum q1_, q2_, m0_, m1_, sumsq_;
  std::size_t count_ = 0;
};

struct SufficientStats {
  double threshold = 0.0;
  double horizon = 0.0;
  std::size_t steps = 0;
  SideSums plus;
  SideSums minus;
  double local_time = 0.0;  ///< 2 sum over strict crossings of |X_{k+1} - r|
  std::size_t crossings = 0;

  const SideSums& side(Side s) const noexcept { return s == Side::plus ? plus : minus; }
  SideSums& side(Side s) noexcept { return s == Side::plus ? plus : minus; }
};

/// Single compensated pass over the trajectory.
SufficientStats sufficient_stats(const Trajectory& traj, double r);

/// Crossing-based local time at r. A grid value equal to r never counts as a crossing.
double local_time_approx(const Trajectory& traj, double r);

struct VolatilityPair {
  double plus = 0.0;
  double minus = 0.0;
  double side(Side s) const noexcept { return s == Side::plus ? plus : minus; }
};

/// Realized volatility of one side: sqrt(sum of squared increments / occupation time).
double volatility_estimate(const SufficientStats& stats, Side side);

/// Both sides. Throws SideUnvisited if either side has no observation.
VolatilityPair volatility_estimate(const SufficientStats& stats);

/// Single volatility from all increments, sqrt(sum dX^2 / T).
double pooled_volatility(const SufficientStats& stats);

/// Prefactor of the N^{1/4} fluctuation of the discrete estimator around its
/// continuous-observation limit: sqrt(4/(3 sqrt(2 pi)) (s-^2 + s+^2)/(s- + s+)).
double clt_scale_constant(const ModelParams& p);

/// Same with 16 in place of 4; governs the crossing local-time approximation.
double local_time_clt_scale_constant(const ModelParams& p);

}  // namespace tou
