#include "tou/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tou {

namespace {

Eigen::Matrix2d inverse_spd(const Eigen::Matrix2d& m, Side side) {
  Eigen::LLT<Eigen::Matrix2d> llt(m);
  if (llt.info() != Eigen::Success || !(m.determinant() > 0.0)) throw DegenerateSide(side);
  return llt.solve(Eigen::Matrix2d::Identity());
}

Eigen::Vector4d center_of(const FitResult& fit) {
  const auto& e = fit.estimate;
  return {e.plus.a, e.plus.b, e.minus.a, e.minus.b};
}

}  // namespace

Eigen::Matrix2d gamma_empirical(const SufficientStats& stats, Side side) {
  const SideSums& s = stats.side(side);
  if (s.count < 2) throw DegenerateSide(side);
  const double t = stats.horizon;
  Eigen::Matrix2d g;
  g << s.q[2] / t, -s.q[1] / t, -s.q[1] / t, s.q[0] / t;
  return g;
}

CovModel cov_model(const FitResult& fit) {
  CovModel m;
  m.gamma_hat_plus = gamma_empirical(fit.stats, Side::plus);
  m.gamma_hat_minus = gamma_empirical(fit.stats, Side::minus);
  m.sigma_hat = fit.sigma_hat;
  m.horizon = fit.stats.horizon;
  const double sp2 = fit.sigma_hat.plus * fit.sigma_hat.plus;
  const double sm2 = fit.sigma_hat.minus * fit.sigma_hat.minus;
  m.cov4.setZero();
  m.cov4.topLeftCorner<2, 2>() = sp2 * inverse_spd(m.gamma_hat_plus, Side::plus) / m.horizon;
  m.cov4.bottomRightCorner<2, 2>() = sm2 * inverse_spd(m.gamma_hat_minus, Side::minus) / m.horizon;
  return m;
}

double confidence_radius(double p) { return std::sqrt(chi2_quantile(p, 4)); }

ConfidenceRegion confidence_region(const FitResult& fit, double p) {
  const CovModel cov = cov_model(fit);
  ConfidenceRegion region;
  region.p = p;
  region.q_p = confidence_radius(p);
  region.center = center_of(fit);
  region.root_plus = Eigen::LLT<Eigen::Matrix2d>(inverse_spd(cov.gamma_hat_plus, Side::plus)).matrixL();
  region.root_minus = Eigen::LLT<Eigen::Matrix2d>(inverse_spd(cov.gamma_hat_minus, Side::minus)).matrixL();
  const double scale = region.q_p / std::sqrt(cov.horizon);
  region.shape.setZero();
  region.shape.topLeftCorner<2, 2>() = scale * fit.sigma_hat.plus * region.root_plus;
  region.shape.bottomRightCorner<2, 2>() = scale * fit.sigma_hat.minus * region.root_minus;
  return region;
}

PlaneEllipse make_plane_ellipse(const Eigen::Vector2d& center, const Eigen::Matrix2d& covariance, double q_p) {
  PlaneEllipse e;
  e.center = center;
  e.covariance = covariance;
  e.q_p = q_p;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(covariance);
  const Eigen::Vector2d lambda = eig.eigenvalues();  // ascending
  e.semi_major = q_p * std::sqrt(std::max(0.0, lambda(1)));
  e.semi_minor = q_p * std::sqrt(std::max(0.0, lambda(0)));
  const Eigen::Vector2d major = eig.eigenvectors().col(1);
  e.angle = std::atan2(major(1), major(0));

  const Eigen::Matrix2d precision = covariance.inverse();
  const Eigen::Vector2d ones = Eigen::Vector2d::Ones();
  const double t = ones.dot(precision * center) / ones.dot(precision * ones);
  const Eigen::Vector2d diff = center - t * ones;
  e.crosses_diagonal = std::sqrt(std::max(0.0, diff.dot(precision * diff))) <= q_p;
  return e;
}

TestResult test_no_threshold(const Eigen::Vector4d& center, const Eigen::Matrix4d& cov4, double p) {
  Eigen::LLT<Eigen::Matrix4d> llt(cov4);
  if (llt.info() != Eigen::Success) throw Error("test_threshold: covariance is not positive definite");
  const Eigen::Matrix4d precision = llt.solve(Eigen::Matrix4d::Identity());

  // Null plane parametrized as v = A u = (u1, u2, u1, u2).
  Eigen::Matrix<double, 4, 2> A;
  A << 1, 0, 0, 1, 1, 0, 0, 1;
  const Eigen::Matrix2d normal = A.transpose() * precision * A;
  const Eigen::Vector2d u = normal.ldlt().solve(A.transpose() * precision * center);

  TestResult t;
  t.p = p;
  t.q_p = confidence_radius(p);
  t.nearest_null_point = A * u;
  const Eigen::Vector4d diff = center - t.nearest_null_point;
  t.min_mahalanobis = std::sqrt(std::max(0.0, diff.dot(precision * diff)));
  t.reject = t.min_mahalanobis > t.q_p;

  auto plane = [&](int i, int j) {
    Eigen::Matrix2d m;
    m << cov4(i, i), cov4(i, j), cov4(j, i), cov4(j, j);
    return make_plane_ellipse({center(i), center(j)}, m, t.q_p);
  };
  t.a_plane = plane(0, 2);
  t.b_plane = plane(1, 3);
  return t;
}

TestResult test_threshold(const FitResult& fit, double p) {
  const CovModel cov = cov_model(fit);
  TestResult t = test_no_threshold(center_of(fit), cov.cov4, p);
  t.threshold_estimated = fit.threshold_estimated;
  return t;
}

}  // namespace tou
