#include "tou/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tou {

namespace {

Eigen::Matrix2d sample_covariance(const std::vector<std::array<double, 4>>& rows, int offset) {
  const auto n = static_cast<double>(rows.size());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& e : rows) mean += Eigen::Vector2d(e[offset], e[offset + 1]);
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& e : rows) {
    const Eigen::Vector2d d = Eigen::Vector2d(e[offset], e[offset + 1]) - mean;
    cov += d * d.transpose();
  }
  return cov / (n - 1.0);
}

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

McCltReport run_mc_clt(const McCltConfig& cfg) {
  const ModelParams& p = cfg.params;
  const AsymptoticConstants asym = gamma_theoretical(p);  // throws NotErgodic

  SimSpec spec;
  spec.params = p;
  spec.horizon = cfg.horizon;
  spec.steps = cfg.steps;
  spec.substeps = cfg.substeps;
  spec.init = Stationary{};
  spec.validate();

  const std::array<double, 4> truth{p.a_plus, p.b_plus, p.a_minus, p.b_minus};
  const double root_t = std::sqrt(cfg.horizon);
  auto per_path = [&](std::size_t, RngStream& rng) -> std::optional<std::array<double, 4>> {
    const Trajectory traj = simulate(spec, rng);
    const DriftEstimate est = drift_mle_partial(sufficient_stats(traj, p.r));
    if (!est.plus.valid || !est.minus.valid) return std::nullopt;
    const auto theta = est.params().as_array();
    std::array<double, 4> e{};
    for (int i = 0; i < 4; ++i) e[i] = root_t * (theta[i] - truth[i]);
    return e;
  };
  const auto results = parallel_map_paths(cfg.n_paths, cfg.seed, per_path, cfg.workers);

  McCltReport rep;
  rep.theory_cov_plus = asym.clt_covariance(Side::plus, p);
  rep.theory_cov_minus = asym.clt_covariance(Side::minus, p);
  const std::array<double, 4> sd{std::sqrt(rep.theory_cov_plus(0, 0)), std::sqrt(rep.theory_cov_plus(1, 1)),
                                 std::sqrt(rep.theory_cov_minus(0, 0)), std::sqrt(rep.theory_cov_minus(1, 1))};
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i]) {
      ++rep.degenerate_paths;
      continue;
    }
    rep.path_ids.push_back(i);
    rep.scaled_errors.push_back(*results[i]);
    std::array<double, 4> z{};
    for (int k = 0; k < 4; ++k) z[k] = (*results[i])[k] / sd[k];
    rep.standardized.push_back(z);
  }
  if (rep.scaled_errors.size() < 3) throw Error("mc-clt: fewer than three nondegenerate paths");

  rep.empirical_cov_plus = sample_covariance(rep.scaled_errors, 0);
  rep.empirical_cov_minus = sample_covariance(rep.scaled_errors, 2);
  rep.cov_rel_error[0] = (rep.empirical_cov_plus - rep.theory_cov_plus).norm() / rep.theory_cov_plus.norm();
  rep.cov_rel_error[1] = (rep.empirical_cov_minus - rep.theory_cov_minus).norm() / rep.theory_cov_minus.norm();
  for (int k = 0; k < 4; ++k) {
    std::vector<double> col;
    col.reserve(rep.standardized.size());
    for (const auto& z : rep.standardized) col.push_back(z[k]);
    rep.ks[k] = ks_test(std::move(col), std_normal_cdf);
  }
  return rep;
}

std::vector<double> density_modes(const StationaryDist& d, std::size_t grid_points) {
  const ModelParams& p = d.params();
  double lo = p.r;
  double hi = p.r;
  for (Side s : {Side::plus, Side::minus}) {
    const SidePiece& piece = d.piece(s);
    const double reach = piece.kind == SidePiece::Kind::Exponential
                             ? 40.0 / piece.rate
                             : std::abs(piece.center - p.r) + 10.0 * piece.scale;
    if (s == Side::plus) {
      hi = p.r + reach;
    } else {
      lo = p.r - reach;
    }
  }
  std::vector<double> x(grid_points);
  std::vector<double> f(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    f[i] = d.density(x[i]);
  }
  std::vector<double> modes;
  for (std::size_t i = 1; i + 1 < grid_points; ++i) {
    if (f[i] > f[i - 1] && f[i] >= f[i + 1]) modes.push_back(x[i]);
  }
  return modes;
}

std::vector<HistogramBin> density_histogram(const std::vector<double>& values, std::size_t bins,
                                            const StationaryDist& d) {
  if (values.empty() || bins == 0) throw std::invalid_argument("density_histogram: empty input");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn;
  double hi = *mx;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(k, bins - 1)]++;
  }
  std::vector<HistogramBin> out(bins);
  const auto n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < bins; ++k) {
    out[k].lo = lo + width * static_cast<double>(k);
    out[k].hi = k + 1 == bins ? hi : lo + width * static_cast<double>(k + 1);
    out[k].empirical = static_cast<double>(counts[k]) / (n * width);
    out[k].theoretical = d.density(0.5 * (out[k].lo + out[k].hi));
  }
  return out;
}

InvariantDensityReport run_invariant_density(const InvariantDensityConfig& cfg) {
  const StationaryDist dist = stationary_dist(cfg.params);

  SimSpec spec;
  spec.params = cfg.params;
  spec.horizon = cfg.horizon;
  spec.steps = cfg.steps;
  spec.init = Deterministic{cfg.x0};
  spec.validate();

  auto terminal = [&](std::size_t, RngStream& rng) {
    // Only the endpoint is needed; run the Euler recursion without storing the path.
    return detail::euler_run(spec.params, cfg.x0, spec.euler_step(), spec.steps, spec.steps + 1, 0, rng,
                             [](double) {});
  };

  InvariantDensityReport rep;
  rep.terminal = parallel_map_paths(cfg.n_paths, cfg.seed, terminal, cfg.workers);
  rep.ks = ks_test(rep.terminal, [&](double x) { return dist.cdf(x); });
  rep.histogram = density_histogram(rep.terminal, cfg.bins, dist);
  rep.modes = density_modes(dist);
  return rep;
}

ModelParams oscillating_bm_params() {
  ModelParams p;
  p.r = 0.0;
  p.a_plus = p.a_minus = 0.0;
  p.b_plus = p.b_minus = 0.0;
  p.sigma_plus = 1.0;
  p.sigma_minus = 2.0;
  return p;
}

void RateStudyConfig::validate() const {
  params.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("rate study: horizon must be > 0");
  if (min_exponent < 1 || min_exponent > max_exponent || max_exponent > ref_exponent || ref_exponent > 30) {
    throw std::invalid_argument("rate study: need 1 <= min <= max <= ref <= 30");
  }
  if (n_paths == 0) throw std::invalid_argument("rate study: n_paths must be > 0");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be > 0");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RateStudyReport run_rate_study(const RateStudyConfig& cfg) {
  cfg.validate();
  const ModelParams& p = cfg.params;
  const std::size_t levels = cfg.max_exponent - cfg.min_exponent + 1;

  SimSpec spec;
  spec.params = p;
  spec.horizon = cfg.horizon;
  spec.steps = std::size_t{1} << cfg.ref_exponent;
  spec.init = Deterministic{cfg.x0.value_or(p.r)};

  struct PathGaps {
    std::vector<double> estimator;  // empty when some level is degenerate
    std::vector<double> local_time;
  };

  auto per_path = [&](std::size_t, RngStream& rng) {
    const Trajectory fine = simulate(spec, rng);
    const SufficientStats ref_stats = sufficient_stats(fine, p.r);
    const DriftEstimate ref = drift_mle_partial(ref_stats);
    bool usable = ref.plus.valid && ref.minus.valid;

    PathGaps g;
    g.local_time.resize(levels);
    std::vector<double> est(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      const unsigned e = cfg.min_exponent + static_cast<unsigned>(l);
      const Trajectory coarse = fine.subsample(std::size_t{1} << (cfg.ref_exponent - e));
      const SufficientStats s = sufficient_stats(coarse, p.r);
      g.local_time[l] = std::abs(s.local_time - ref_stats.local_time);
      const DriftEstimate de = drift_mle_partial(s);
      if (!de.plus.valid || !de.minus.valid) {
        usable = false;
        continue;
      }
      if (usable) {
        const auto a = de.params().as_array();
        const auto b = ref.params().as_array();
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) sum += std::abs(a[i] - b[i]);
        est[l] = sum / 4.0;
      }
    }
    if (usable) g.estimator = std::move(est);
    return g;
  };
  const auto gaps = parallel_map_paths(cfg.n_paths, cfg.seed, per_path, cfg.workers);

  RateStudyReport rep;
  std::vector<double> est_sum(levels, 0.0);
  std::vector<double> lt_sum(levels, 0.0);
  for (const auto& g : gaps) {
    for (std::size_t l = 0; l < levels; ++l) lt_sum[l] += g.local_time[l];
    if (g.estimator.empty()) continue;
    ++rep.estimator_paths;
    for (std::size_t l = 0; l < levels; ++l) est_sum[l] += g.estimator[l];
  }

  std::vector<double> ns;
  std::vector<double> est_mean;
  std::vector<double> lt_mean;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t l = 0; l < levels; ++l) {
    RateStudyRow row;
    row.n = std::size_t{1} << (cfg.min_exponent + l);
    row.local_time_gap = lt_sum[l] / static_cast<double>(cfg.n_paths);
    row.estimator_gap = rep.estimator_paths ? est_sum[l] / static_cast<double>(rep.estimator_paths) : nan;
    rep.rows.push_back(row);
    ns.push_back(static_cast<double>(row.n));
    est_mean.push_back(row.estimator_gap);
    lt_mean.push_back(row.local_time_gap);
  }
  if (cfg.max_exponent < cfg.ref_exponent) rep.rows.push_back({spec.steps, 0.0, 0.0});

  rep.local_time_slope = levels >= 2 ? loglog_slope(ns, lt_mean) : nan;
  rep.estimator_slope = levels >= 2 && rep.estimator_paths ? loglog_slope(ns, est_mean) : nan;
  return rep;
}

CalibrationReport run_test_calibration(const CalibrationConfig& cfg) {
  SimSpec spec;
  spec.params = cfg.params;
  spec.horizon = cfg.horizon;
  spec.steps = cfg.steps;
  spec.init = cfg.init;
  spec.validate();

  // 1 = reject, 0 = accept, -1 = no test possible.
  auto per_run = [&](std::size_t, RngStream& rng) -> int {
    const Trajectory traj = simulate(spec, rng);
    try {
      FitResult fit;
      switch (cfg.mode) {
        case ThresholdMode::true_value:
          fit = fit_at_threshold(traj, cfg.params.r, cfg.method);
          break;
        case ThresholdMode::median:
          fit = fit_at_threshold(traj, median_of(traj.values), cfg.method);
          break;
        case ThresholdMode::search:
          fit = threshold_search(traj, cfg.grid, cfg.method);
          break;
      }
      return test_threshold(fit, cfg.p).reject ? 1 : 0;
    } catch (const Error&) {
      return -1;
    }
  };
  const auto outcomes = parallel_map_paths(cfg.n_runs, cfg.seed, per_run, cfg.workers);

  CalibrationReport rep;
  for (int o : outcomes) {
    if (o < 0) {
      ++rep.failures;
      continue;
    }
    ++rep.runs;
    rep.rejections += static_cast<std::size_t>(o);
  }
  return rep;
}

nlohmann::json run_rates(const RateParseResult& data, const RatesConfig& cfg) {
  RateSeries series = cfg.last_rows ? data.series.tail(*cfg.last_rows) : data.series;
  const Trajectory traj = series.to_trajectory();

  nlohmann::json out = {{"schema", "tou.rates/1"},
                        {"n_obs", series.size()},
                        {"dropped_rows", data.dropped},
                        {"dt_months", series.dt_months},
                        {"first_date", series.dates.empty() ? "" : series.dates.front()},
                        {"last_date", series.dates.empty() ? "" : series.dates.back()},
                        {"delta", cfg.grid.delta},
                        {"grid_points", cfg.grid.n_points},
                        {"p", cfg.p}};
  for (Method m : cfg.methods) {
    const FitResult fit = threshold_search(traj, cfg.grid, m);
    nlohmann::json entry = {{"fit", to_json(fit, false)}};
    try {
      entry["test"] = to_json(test_threshold(fit, cfg.p));
    } catch (const Error& e) {
      entry["test"] = nullptr;
      entry["test_error"] = e.what();
    }
    out[m == Method::MLE ? "mle" : "qmle"] = std::move(entry);
  }
  return out;
}

}  // namespace tou
