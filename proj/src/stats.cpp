#include "tou/stats.hpp"

#include <cmath>
#include <numbers>

namespace tou {

namespace {

double scale_prefactor(const ModelParams& p, double numerator) {
  const double sp = p.sigma_plus;
  const double sm = p.sigma_minus;
  return std::sqrt(numerator / (3.0 * std::sqrt(2.0 * std::numbers::pi)) * (sm * sm + sp * sp) /
                   (sm + sp));
}

}  // namespace

SideSums SideSumsBuilder::finish(double dt) const noexcept {
  SideSums s;
  s.q[0] = dt * static_cast<double>(count_);
  s.q[1] = dt * q1_.value();
  s.q[2] = dt * q2_.value();
  s.m[0] = m0_.value();
  s.m[1] = m1_.value();
  s.sumsq = sumsq_.value();
  s.count = count_;
  return s;
}

SufficientStats sufficient_stats(const Trajectory& traj, double r) {
  traj.validate();
  SideSumsBuilder plus;
  SideSumsBuilder minus;
  CompensatedSum local_time;
  std::size_t crossings = 0;

  const auto& x = traj.values;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double dx = x[k + 1] - x[k];
    (x[k] >= r ? plus : minus).add(x[k], dx);
    if ((x[k] - r) * (x[k + 1] - r) < 0.0) {
      local_time += std::abs(x[k + 1] - r);
      ++crossings;
    }
  }

  SufficientStats s;
  s.threshold = r;
  s.steps = traj.steps();
  s.horizon = traj.horizon();
  s.plus = plus.finish(traj.dt);
  s.minus = minus.finish(traj.dt);
  s.local_time = 2.0 * local_time.value();
  s.crossings = crossings;
  return s;
}

double local_time_approx(const Trajectory& traj, double r) {
  traj.validate();
  CompensatedSum sum;
  const auto& x = traj.values;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if ((x[k] - r) * (x[k + 1] - r) < 0.0) sum += std::abs(x[k + 1] - r);
  }
  return 2.0 * sum.value();
}

double volatility_estimate(const SufficientStats& stats, Side side) {
  const SideSums& s = stats.side(side);
  if (s.count == 0) throw SideUnvisited(side);
  return std::sqrt(s.sumsq / s.q[0]);
}

VolatilityPair volatility_estimate(const SufficientStats& stats) {
  return {volatility_estimate(stats, Side::plus), volatility_estimate(stats, Side::minus)};
}

double pooled_volatility(const SufficientStats& stats) {
  return std::sqrt((stats.plus.sumsq + stats.minus.sumsq) / (stats.plus.q[0] + stats.minus.q[0]));
}

double clt_scale_constant(const ModelParams& p) { return scale_prefactor(p, 4.0); }

double local_time_clt_scale_constant(const ModelParams& p) { return scale_prefactor(p, 16.0); }

}  // namespace tou
