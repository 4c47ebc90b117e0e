#pragma once

/**
 * @file estimate.hpp
 * @brief Closed-form drift (quasi-)maximum likelihood at a fixed threshold,
 * the discretized likelihood functions, and the threshold grid search.
 */

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tou/stats.hpp"

namespace tou {

enum class Method { MLE, QMLE };

const char* to_string(Method m);

/// Drift coefficients ordered (a+, b+, a-, b-).
struct DriftParams {
  double a_plus = 0.0;
  double b_plus = 0.0;
  double a_minus = 0.0;
  double b_minus = 0.0;

  std::array<double, 4> as_array() const { return {a_plus, b_plus, a_minus, b_minus}; }
  static DriftParams from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct SideFit {
  double a = 0.0;
  double b = 0.0;
  double det = 0.0;
  bool valid = false;
};

struct DriftEstimate {
  double threshold_used = 0.0;
  SideFit plus;
  SideFit minus;

  const SideFit& side(Side s) const noexcept { return s == Side::plus ? plus : minus; }
  DriftParams params() const { return {plus.a, plus.b, minus.a, minus.b}; }
};

/// Relative guard eps = 1e-12 * max(1, q0 q2) below which a side's design is degenerate.
double determinant_epsilon(const SideSums& s);

/// Solves the 2x2 normal equations of one side. Throws DegenerateSide when
/// fewer than two observations fall on the side or det <= eps.
SideFit drift_mle_side(const SufficientStats& stats, Side side);

/// Both sides; throws DegenerateSide naming the first degenerate side.
DriftEstimate drift_mle(const SufficientStats& stats);

/// Both sides, never throws; degenerate sides come back with valid = false.
DriftEstimate drift_mle_partial(const SufficientStats& stats);

/// Per-side term b M0 - a M1 - (b^2 q0 + a^2 q2 - 2ab q1)/2.
double quasi_likelihood_side(const SideSums& s, double a, double b);

/// Discretized quasi-likelihood (unit volatility).
double quasi_likelihood(const SufficientStats& stats, const DriftParams& theta);

/// Log of the discretized Girsanov likelihood: sum of the per-side
/// quasi-likelihood terms divided by sigma^2.
double log_likelihood(const SufficientStats& stats, const DriftParams& theta, const VolatilityPair& sigma);

/// Nearest-rank delta and (1 - delta) percentiles of the observed values.
std::pair<double, double> percentiles(const Trajectory& traj, double delta);

struct ThresholdGrid {
  double delta = 0.15;
  std::size_t n_points = 200;

  void validate() const;
};

/// n_points values spaced uniformly on [c, d] (the midpoint when n_points = 1).
std::vector<double> threshold_candidates(const Trajectory& traj, const ThresholdGrid& grid);

struct ProfilePoint {
  double r = 0.0;
  double score = 0.0;
  bool valid = false;
};

struct FitResult {
  DriftEstimate estimate;
  /// MLE: per-side realized volatility. QMLE: the pooled volatility on both sides.
  VolatilityPair sigma_hat;
  double loglik = 0.0;     ///< log G at (theta_hat, sigma_hat)
  double quasi_lik = 0.0;  ///< Lambda at theta_hat
  SufficientStats stats;
  Method method = Method::MLE;
  bool threshold_estimated = false;
  std::vector<ProfilePoint> profile;  ///< score per candidate (empty for a fixed threshold)

  double threshold() const noexcept { return estimate.threshold_used; }
};

/// Drift, volatility and likelihood values with the threshold held at r.
FitResult fit_at_threshold(const Trajectory& traj, double r, Method method);

/// Scores every candidate threshold and returns the best fit. Candidates that
/// leave a side degenerate are skipped; ties go to the smallest r. Per-side
/// sums for all candidates come from one sorted sweep, O(N log N + G).
FitResult threshold_search(const Trajectory& traj, std::span<const double> candidates, Method method);

FitResult threshold_search(const Trajectory& traj, const ThresholdGrid& grid, Method method);

}  // namespace tou
