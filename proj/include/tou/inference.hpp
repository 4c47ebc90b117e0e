#pragma once

/**
 * @file inference.hpp
 * @brief Plug-in asymptotic covariance of the drift estimator, the confidence
 * ellipsoid it induces, and the no-threshold test built on it.
 *
 * The null hypothesis (a+, b+) = (a-, b-) is the plane {v1 = v3, v2 = v4}
 * in R^4. The ellipsoid {v : (v - theta)^T C^{-1} (v - theta) <= q_p^2} misses
 * that plane iff the minimal Mahalanobis distance from theta to it exceeds
 * q_p, which is what test_threshold() computes.
 */

#include <Eigen/Dense>

#include "tou/estimate.hpp"

namespace tou {

/// Riemann-sum estimate [[q2/T, -q1/T], [-q1/T, q0/T]] of one side's gamma.
Eigen::Matrix2d gamma_empirical(const SufficientStats& stats, Side side);

struct CovModel {
  Eigen::Matrix2d gamma_hat_plus;
  Eigen::Matrix2d gamma_hat_minus;
  VolatilityPair sigma_hat;
  double horizon = 0.0;
  /// Covariance of (a+, b+, a-, b-): blockdiag(s+^2 G+^{-1}, s-^2 G-^{-1}) / T.
  Eigen::Matrix4d cov4;
};

/// Throws DegenerateSide if either gamma estimate is not positive definite.
CovModel cov_model(const FitResult& fit);

/// Radius q_p with P(|G| <= q_p) = p for a 4-dimensional standard Gaussian G.
double confidence_radius(double p);

struct ConfidenceRegion {
  double p = 0.95;
  double q_p = 0.0;
  Eigen::Vector4d center;
  /// Region = { center + shape z : |z| <= 1 }; shape = (q_p / sqrt(T)) blockdiag(s+ U+, s- U-)
  /// with U U^T = gamma^{-1} (lower Cholesky factor).
  Eigen::Matrix4d shape;
  Eigen::Matrix2d root_plus;   ///< U+
  Eigen::Matrix2d root_minus;  ///< U-
};

ConfidenceRegion confidence_region(const FitResult& fit, double p);

/// Projection of the 4-d region on a coordinate plane, for plotting.
struct PlaneEllipse {
  Eigen::Vector2d center;
  Eigen::Matrix2d covariance;  ///< marginal covariance; the ellipse is (v-c)^T M^{-1} (v-c) <= q_p^2
  double q_p = 0.0;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;  ///< of the major axis, radians from the first coordinate
  bool crosses_diagonal = false;
};

PlaneEllipse make_plane_ellipse(const Eigen::Vector2d& center, const Eigen::Matrix2d& covariance, double q_p);

struct TestResult {
  double p = 0.95;
  double q_p = 0.0;
  double min_mahalanobis = 0.0;
  bool reject = false;
  Eigen::Vector4d nearest_null_point;
  PlaneEllipse a_plane;  ///< (a+, a-)
  PlaneEllipse b_plane;  ///< (b+, b-)
  bool threshold_estimated = false;
};

/// Core of the test for an arbitrary center and positive definite covariance.
TestResult test_no_threshold(const Eigen::Vector4d& center, const Eigen::Matrix4d& cov4, double p);

/// Reject H0 iff the confidence region misses the null plane.
TestResult test_threshold(const FitResult& fit, double p);

}  // namespace tou
