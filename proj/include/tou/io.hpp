#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tou/estimate.hpp"
#include "tou/inference.hpp"
#include "tou/model.hpp"
#include "tou/simulate.hpp"

namespace tou {

/// Version tags embedded in every JSON document; bump on breaking changes.
inline constexpr const char* kFitSchema = "tou.fit/1";
inline constexpr const char* kTestSchema = "tou.test/1";

inline constexpr double kDefaultDtMonths = 0.046;

/// A dated rate series. Values are used as the state variable as given
/// (percent for the usual T-bill files).
struct RateSeries {
  std::vector<std::string> dates;
  std::vector<double> values;
  double dt_months = kDefaultDtMonths;

  std::size_t size() const noexcept { return values.size(); }
  /// Last n observations (all of them if n >= size()).
  RateSeries tail(std::size_t n) const;
  Trajectory to_trajectory() const;
};

struct RateParseResult {
  RateSeries series;
  std::size_t dropped = 0;  ///< rows whose value was missing
};

/**
 * Reads a `date,value` CSV. Dates must be ISO-8601 (YYYY-MM-DD, optionally
 * followed by a time) and strictly increasing. Rows whose value is empty,
 * "null", "NA", "NaN" or "." are dropped and counted. Anything else that does
 * not parse raises ParseError with the 1-based line number.
 */
RateParseResult parse_rate_series(std::istream& in);
RateParseResult load_rate_series(const std::filesystem::path& path);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// CSV with header `t,path_id,x`, N+1 rows per path.
void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> paths, std::size_t first_path_id = 0);

/// Reads the CSV written by write_trajectories_csv; dt is recovered from the
/// time column and must be uniform.
std::vector<Trajectory> read_trajectories_csv(std::istream& in);

nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SufficientStats& s);
SufficientStats stats_from_json(const nlohmann::json& j);

/// Mean-reversion level b/a, or null when |a| < 1e-12.
nlohmann::json mean_reversion_level(double a, double b);

nlohmann::json to_json(const FitResult& fit, bool include_profile = true);
FitResult fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PlaneEllipse& e);
nlohmann::json to_json(const TestResult& t);

}  // namespace tou
