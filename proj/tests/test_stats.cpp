#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tou/stats.hpp"

using namespace tou;

namespace {

Trajectory path(std::vector<double> v, double dt = 1.0) {
  Trajectory t;
  t.dt = dt;
  t.values = std::move(v);
  return t;
}

}  // namespace

TEST(SufficientStats, HandExample) {
  const SufficientStats s = sufficient_stats(path({-1.0, 1.0, -1.0}), 0.0);
  EXPECT_EQ(s.plus.q[0], 1.0);
  EXPECT_EQ(s.minus.q[0], 1.0);
  EXPECT_EQ(s.plus.m[0], -2.0);
  EXPECT_EQ(s.minus.m[0], 2.0);
  EXPECT_EQ(s.plus.m[1], -2.0);
  EXPECT_EQ(s.minus.m[1], -2.0);
  EXPECT_EQ(s.plus.q[1], 1.0);
  EXPECT_EQ(s.minus.q[1], -1.0);
  EXPECT_EQ(s.plus.q[2], 1.0);
  EXPECT_EQ(s.minus.q[2], 1.0);
  EXPECT_EQ(s.crossings, 2u);
}

TEST(SufficientStats, ConstantPathAboveThreshold) {
  const SufficientStats s = sufficient_stats(path({2.5, 2.5, 2.5, 2.5}, 0.5), 1.0);
  EXPECT_EQ(s.minus.count, 0u);
  EXPECT_EQ(s.minus.q[0], 0.0);
  EXPECT_EQ(s.plus.m[0], 0.0);
  EXPECT_EQ(s.plus.m[1], 0.0);
  EXPECT_DOUBLE_EQ(s.plus.q[0], 1.5);
  EXPECT_DOUBLE_EQ(s.plus.q[1], 1.5 * 2.5);
  EXPECT_DOUBLE_EQ(s.plus.q[2], 1.5 * 6.25);
  EXPECT_EQ(s.plus.det(), 0.0);
}

TEST(SufficientStats, AdditiveOverConcatenation) {
  RngStream g(4, 0);
  std::vector<double> v(201);
  v[0] = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) v[k] = v[k - 1] + 0.1 * g.normal();
  const Trajectory whole = path(v, 0.01);
  const Trajectory left = path({v.begin(), v.begin() + 101}, 0.01);
  const Trajectory right = path({v.begin() + 100, v.end()}, 0.01);
  const double r = 0.05;
  const SufficientStats a = sufficient_stats(whole, r);
  const SufficientStats b = sufficient_stats(left, r);
  const SufficientStats c = sufficient_stats(right, r);
  for (Side s : {Side::plus, Side::minus}) {
    for (int m = 0; m < 3; ++m) EXPECT_NEAR(a.side(s).q[m], b.side(s).q[m] + c.side(s).q[m], 1e-13);
    for (int m = 0; m < 2; ++m) EXPECT_NEAR(a.side(s).m[m], b.side(s).m[m] + c.side(s).m[m], 1e-13);
    EXPECT_EQ(a.side(s).count, b.side(s).count + c.side(s).count);
  }
  EXPECT_NEAR(a.local_time, b.local_time + c.local_time, 1e-13);
}

TEST(SufficientStats, TelescopingAndOccupation) {
  RngStream g(6, 0);
  std::vector<double> v(10001);
  v[0] = 0.3;
  for (std::size_t k = 1; k < v.size(); ++k) v[k] = v[k - 1] + 0.05 * g.normal();
  const Trajectory t = path(v, 1e-3);
  const SufficientStats s = sufficient_stats(t, 0.2);
  EXPECT_NEAR(s.plus.m[0] + s.minus.m[0], v.back() - v.front(), 1e-12);
  EXPECT_DOUBLE_EQ(s.plus.q[0] + s.minus.q[0], t.dt * 10000);
  EXPECT_GT(s.plus.det(), 0.0);
  EXPECT_GT(s.minus.det(), 0.0);
}

TEST(LocalTime, HandExample) { EXPECT_DOUBLE_EQ(local_time_approx(path({-1.0, 0.5, -0.25, 2.0}), 0.0), 5.5); }

TEST(LocalTime, MonotonePathWithoutCrossing) {
  EXPECT_EQ(local_time_approx(path({1.0, 2.0, 3.0, 4.0}), 0.5), 0.0);
}

TEST(LocalTime, TouchingThresholdIsNotACrossing) {
  const SufficientStats s = sufficient_stats(path({-1.0, 0.0, 1.0}), 0.0);
  EXPECT_EQ(s.crossings, 0u);
  EXPECT_EQ(s.local_time, 0.0);
}

TEST(LocalTime, ShiftInvariant) {
  const std::vector<double> v{-1.0, 0.5, -0.25, 2.0, -3.0};
  std::vector<double> w;
  for (double x : v) w.push_back(x + 10.0);
  EXPECT_NEAR(local_time_approx(path(v), 0.0), local_time_approx(path(w), 10.0), 1e-12);
}

TEST(Volatility, LinearPathGivesDt) {
  std::vector<double> v;
  const double dt = 0.01;
  for (int k = 0; k <= 100; ++k) v.push_back(k * dt);
  const SufficientStats s = sufficient_stats(path(v, dt), -1.0);
  EXPECT_NEAR(std::pow(volatility_estimate(s, Side::plus), 2), dt, 1e-14);
  EXPECT_THROW(volatility_estimate(s, Side::minus), SideUnvisited);
  EXPECT_THROW(volatility_estimate(s), SideUnvisited);
}

TEST(Volatility, PooledFromAllIncrements) {
  const SufficientStats s = sufficient_stats(path({0.0, 1.0, -1.0, 0.0}, 0.5), 0.0);
  EXPECT_NEAR(pooled_volatility(s), std::sqrt((1.0 + 4.0 + 1.0) / 1.5), 1e-14);
}

TEST(Volatility, ReferenceSimulationRecoversSigmas) {
  SimSpec spec;
  spec.params = reference_params();
  spec.horizon = 1000.0;
  spec.steps = 1000000;
  spec.init = Deterministic{kReferenceX0};
  RngStream g(2024, 0);
  const SufficientStats s = sufficient_stats(simulate(spec, g), spec.params.r);
  const VolatilityPair v = volatility_estimate(s);
  EXPECT_NEAR(v.plus, 0.0100, 0.05 * 0.0100);
  EXPECT_NEAR(v.minus, 0.0110, 0.05 * 0.0110);
}

TEST(CltConstants, EqualVolatilities) {
  ModelParams p;
  p.sigma_plus = p.sigma_minus = 0.3;
  EXPECT_NEAR(clt_scale_constant(p), std::sqrt(4.0 * 0.3 / (3.0 * std::sqrt(2.0 * std::numbers::pi))), 1e-15);
}

TEST(CltConstants, ReferenceValueAndRatio) {
  const ModelParams p = reference_params();
  const double sp = p.sigma_plus;
  const double sm = p.sigma_minus;
  const double expected = std::sqrt(4.0 / (3.0 * std::sqrt(2.0 * std::numbers::pi)) * (sm * sm + sp * sp) / (sm + sp));
  EXPECT_NEAR(clt_scale_constant(p), expected, 1e-15);
  EXPECT_NEAR(local_time_clt_scale_constant(p) / clt_scale_constant(p), 2.0, 1e-15);
}
