#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "tou/inference.hpp"

using namespace tou;

namespace {

FitResult synthetic_fit(const Eigen::Vector4d& center, double horizon) {
  // Sums chosen so both gamma estimates are the identity: q0 = q2 = T, q1 = 0.
  FitResult fit;
  fit.estimate.plus = {center(0), center(1), horizon * horizon, true};
  fit.estimate.minus = {center(2), center(3), horizon * horizon, true};
  fit.sigma_hat = {1.0, 1.0};
  fit.stats.horizon = horizon;
  for (SideSums* s : {&fit.stats.plus, &fit.stats.minus}) {
    s->q = {horizon, 0.0, horizon};
    s->count = 10;
  }
  return fit;
}

}  // namespace

TEST(GammaEmpirical, HandExample) {
  Trajectory t;
  t.dt = 1.0;
  t.values = {0.0, 1.0, 3.0, 2.0};
  const SufficientStats s = sufficient_stats(t, -10.0);
  Eigen::Matrix2d expected;
  expected << 10.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0, 1.0;
  EXPECT_LT((gamma_empirical(s, Side::plus) - expected).norm(), 1e-15);
  EXPECT_THROW(gamma_empirical(s, Side::minus), DegenerateSide);
}

TEST(GammaEmpirical, ConvergesToTheoretical) {
  // A single path at T = 1000 is far from the limit: the occupation fraction of
  // each side still fluctuates by about 20% because regime switches are rare.
  // The Monte Carlo mean over paths must match the closed form.
  const ModelParams p = reference_params();
  SimSpec spec;
  spec.params = p;
  spec.horizon = 1000.0;
  spec.steps = 1000000;
  spec.init = Stationary{};
  const std::size_t n = 200;
  const auto gammas = parallel_map_paths(n, 55, [&](std::size_t, RngStream& g) {
    const SufficientStats s = sufficient_stats(simulate(spec, g), p.r);
    return std::array<Eigen::Matrix2d, 2>{gamma_empirical(s, Side::plus), gamma_empirical(s, Side::minus)};
  });
  const AsymptoticConstants c = gamma_theoretical(p);
  for (Side side : {Side::plus, Side::minus}) {
    Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
    for (const auto& g : gammas) {
      const Eigen::Matrix2d& gh = g[side == Side::plus ? 0 : 1];
      EXPECT_GT(gh.determinant(), 0.0);
      mean += gh / static_cast<double>(n);
    }
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(mean(i, j), c.gamma(side)(i, j), 0.05 * std::abs(c.gamma(side)(i, j))) << to_string(side) << i << j;
      }
    }
  }
}

TEST(ConfidenceRadius, At95) { EXPECT_NEAR(confidence_radius(0.95), 3.0802, 1e-4); }

TEST(ConfidenceRegion, IdentityCovarianceIsBall) {
  const FitResult fit = synthetic_fit({0.1, 0.2, 0.3, 0.4}, 16.0);
  const ConfidenceRegion r = confidence_region(fit, 0.95);
  const Eigen::Matrix4d expected = Eigen::Matrix4d::Identity() * r.q_p / 4.0;
  EXPECT_LT((r.shape - expected).norm(), 1e-14);
}

TEST(ConfidenceRegion, ShrinksAsInverseRootHorizon) {
  const ConfidenceRegion a = confidence_region(synthetic_fit({0, 0, 0, 0}, 4.0), 0.95);
  const ConfidenceRegion b = confidence_region(synthetic_fit({0, 0, 0, 0}, 400.0), 0.95);
  EXPECT_NEAR(a.shape(0, 0) / b.shape(0, 0), 10.0, 1e-12);
}

TEST(ConfidenceRegion, ShapeReproducesCovariance) {
  const ModelParams p = reference_params();
  SimSpec spec;
  spec.params = p;
  spec.horizon = 100.0;
  spec.steps = 100000;
  spec.init = Stationary{};
  RngStream g(56, 0);
  const FitResult fit = fit_at_threshold(simulate(spec, g), p.r, Method::MLE);
  const ConfidenceRegion r = confidence_region(fit, 0.95);
  const Eigen::Matrix4d cov = cov_model(fit).cov4;
  const Eigen::Matrix4d rebuilt = r.shape * r.shape.transpose() / (r.q_p * r.q_p);
  EXPECT_LT((rebuilt - cov).norm(), 1e-10 * cov.norm());
}

TEST(TestNoThreshold, UnitExample) {
  const TestResult t = test_no_threshold({1.0, 0.0, 0.0, 0.0}, Eigen::Matrix4d::Identity(), 0.95);
  EXPECT_NEAR(t.min_mahalanobis, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(t.nearest_null_point(0), 0.5, 1e-15);
  EXPECT_NEAR(t.nearest_null_point(1), 0.0, 1e-15);
  EXPECT_NEAR(t.nearest_null_point(2), 0.5, 1e-15);
  EXPECT_FALSE(t.reject);
}

TEST(TestNoThreshold, PointOnNullPlaneNeverRejects) {
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity() * 1e-8;
  cov(0, 1) = cov(1, 0) = 5e-9;
  const TestResult t = test_no_threshold({0.3, -0.2, 0.3, -0.2}, cov, 0.95);
  EXPECT_NEAR(t.min_mahalanobis, 0.0, 1e-9);
  EXPECT_FALSE(t.reject);
}

TEST(TestNoThreshold, RejectsFarPoint) {
  const TestResult t = test_no_threshold({10.0, 0.0, -10.0, 0.0}, Eigen::Matrix4d::Identity(), 0.95);
  EXPECT_NEAR(t.min_mahalanobis, std::sqrt(200.0), 1e-12);
  EXPECT_TRUE(t.reject);
  EXPECT_FALSE(t.a_plane.crosses_diagonal);
  EXPECT_TRUE(t.b_plane.crosses_diagonal);
}

TEST(TestNoThreshold, NotPositiveDefiniteThrows) {
  EXPECT_THROW(test_no_threshold({0, 0, 0, 0}, Eigen::Matrix4d::Zero(), 0.95), Error);
}

TEST(PlaneEllipse, AxesFromEigenvalues) {
  Eigen::Matrix2d cov;
  cov << 4.0, 0.0, 0.0, 1.0;
  const PlaneEllipse e = make_plane_ellipse({0.0, 0.0}, cov, 2.0);
  EXPECT_NEAR(e.semi_major, 4.0, 1e-14);
  EXPECT_NEAR(e.semi_minor, 2.0, 1e-14);
  EXPECT_NEAR(std::abs(std::cos(e.angle)), 1.0, 1e-14);
  EXPECT_TRUE(e.crosses_diagonal);
}
