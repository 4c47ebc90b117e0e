#pragma once

/**
 * @file experiments.hpp
 * @brief Monte Carlo drivers behind the CLI and the acceptance suite.
 *
 * Every driver fans paths across workers with parallel_map_paths and
 * aggregates in path-index order, so results depend only on the seed.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tou/estimate.hpp"
#include "tou/inference.hpp"
#include "tou/io.hpp"
#include "tou/model.hpp"
#include "tou/numerics.hpp"
#include "tou/simulate.hpp"

namespace tou {

struct McCltConfig {
  ModelParams params = reference_params();
  double horizon = 100.0;
  std::size_t steps = 100000;
  std::size_t n_paths = 200;
  unsigned substeps = 1;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

struct McCltReport {
  /// sqrt(T) (theta_hat - theta) per path, ordered (a+, b+, a-, b-). Degenerate paths are omitted.
  std::vector<std::array<double, 4>> scaled_errors;
  /// Same, each component divided by its theoretical standard deviation.
  std::vector<std::array<double, 4>> standardized;
  std::vector<std::size_t> path_ids;
  std::size_t degenerate_paths = 0;
  Eigen::Matrix2d theory_cov_plus;
  Eigen::Matrix2d theory_cov_minus;
  Eigen::Matrix2d empirical_cov_plus;
  Eigen::Matrix2d empirical_cov_minus;
  /// Relative Frobenius error of the empirical covariance, per side (plus, minus).
  std::array<double, 2> cov_rel_error{};
  std::array<KsResult, 4> ks{};
};

/// Stationary paths, drift estimated at the true threshold. Throws NotErgodic.
McCltReport run_mc_clt(const McCltConfig& cfg);

struct InvariantDensityConfig {
  ModelParams params = reference_params();
  double horizon = 200.0;
  std::size_t steps = 200000;
  std::size_t n_paths = 500;
  double x0 = kReferenceX0;
  std::size_t bins = 40;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  double empirical = 0.0;    ///< count / (n * width)
  double theoretical = 0.0;  ///< stationary density at the bin center
};

struct InvariantDensityReport {
  std::vector<double> terminal;
  KsResult ks;
  std::vector<HistogramBin> histogram;
  std::vector<double> modes;  ///< local maxima of the stationary density
};

/// Positions of the local maxima of the stationary density on a fine grid.
std::vector<double> density_modes(const StationaryDist& d, std::size_t grid_points = 20001);

/// Histogram of @p values on [min, max] with @p bins equal bins; empirical heights integrate to 1.
std::vector<HistogramBin> density_histogram(const std::vector<double>& values, std::size_t bins,
                                            const StationaryDist& d);

/// Terminal values of paths started at x0 against the stationary law. Throws NotErgodic.
InvariantDensityReport run_invariant_density(const InvariantDensityConfig& cfg);

/// a = b = 0 on both sides, r = 0, sigma+ = 1, sigma- = 2.
ModelParams oscillating_bm_params();

struct RateStudyConfig {
  ModelParams params = oscillating_bm_params();
  double horizon = 1.0;
  std::optional<double> x0;  ///< defaults to the threshold
  unsigned min_exponent = 10;
  unsigned max_exponent = 16;
  unsigned ref_exponent = 20;
  std::size_t n_paths = 300;
  std::uint64_t seed = 1;
  unsigned workers = 0;

  void validate() const;
};

struct RateStudyRow {
  std::size_t n = 0;
  double estimator_gap = 0.0;   ///< mean over paths of the mean |component difference|
  double local_time_gap = 0.0;  ///< mean over paths of |L_N - L_ref|
};

struct RateStudyReport {
  std::vector<RateStudyRow> rows;  ///< ladder levels, then the reference level (gap 0)
  double estimator_slope = 0.0;
  double local_time_slope = 0.0;
  std::size_t estimator_paths = 0;  ///< paths with a nondegenerate fit at every level
};

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

RateStudyReport run_rate_study(const RateStudyConfig& cfg);

enum class ThresholdMode { true_value, median, search };

struct CalibrationConfig {
  ModelParams params = reference_params();
  double horizon = 1000.0;
  std::size_t steps = 1000000;
  std::size_t n_runs = 200;
  InitialCondition init = Stationary{};
  ThresholdMode mode = ThresholdMode::search;
  Method method = Method::MLE;
  ThresholdGrid grid;
  double p = 0.95;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

struct CalibrationReport {
  std::size_t runs = 0;
  std::size_t rejections = 0;
  std::size_t failures = 0;  ///< runs where the fit or the test could not be formed
  double rejection_rate() const noexcept {
    return runs ? static_cast<double>(rejections) / static_cast<double>(runs) : 0.0;
  }
};

/// Rejection frequency of the no-threshold test over independent runs.
CalibrationReport run_test_calibration(const CalibrationConfig& cfg);

struct RatesConfig {
  ThresholdGrid grid;
  double p = 0.95;
  std::optional<std::size_t> last_rows;
  std::vector<Method> methods{Method::QMLE, Method::MLE};
};

/// Threshold search, estimates, mean-reversion levels and the test, per method, as JSON.
nlohmann::json run_rates(const RateParseResult& data, const RatesConfig& cfg);

}  // namespace tou
