#include "tou/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace tou {

namespace {

bool side_degenerate(const SideSums& s) { return s.count < 2 || !(s.det() > determinant_epsilon(s)); }

SideFit solve_side(const SideSums& s) {
  SideFit f;
  f.det = s.det();
  if (side_degenerate(s)) return f;
  f.a = (s.m[0] * s.q[1] - s.q[0] * s.m[1]) / f.det;
  f.b = (s.m[0] * s.q[2] - s.q[1] * s.m[1]) / f.det;
  f.valid = true;
  return f;
}

double side_volatility(const SideSums& s) { return std::sqrt(s.sumsq / s.q[0]); }

// Score of one candidate split; nullopt when a side is degenerate.
std::optional<double> score_split(const SideSums& plus, const SideSums& minus, Method method) {
  const SideFit fp = solve_side(plus);
  const SideFit fm = solve_side(minus);
  if (!fp.valid || !fm.valid) return std::nullopt;
  const double lp = quasi_likelihood_side(plus, fp.a, fp.b);
  const double lm = quasi_likelihood_side(minus, fm.a, fm.b);
  if (method == Method::QMLE) return lp + lm;
  const double sp = side_volatility(plus);
  const double sm = side_volatility(minus);
  if (!(sp > 0.0) || !(sm > 0.0)) return std::nullopt;
  return lp / (sp * sp) + lm / (sm * sm);
}

}  // namespace

const char* to_string(Method m) { return m == Method::MLE ? "MLE" : "QMLE"; }

double determinant_epsilon(const SideSums& s) { return 1e-12 * std::max(1.0, s.q[0] * s.q[2]); }

SideFit drift_mle_side(const SufficientStats& stats, Side side) {
  SideFit f = solve_side(stats.side(side));
  if (!f.valid) throw DegenerateSide(side);
  return f;
}

DriftEstimate drift_mle(const SufficientStats& stats) {
  DriftEstimate e;
  e.threshold_used = stats.threshold;
  e.plus = drift_mle_side(stats, Side::plus);
  e.minus = drift_mle_side(stats, Side::minus);
  return e;
}

DriftEstimate drift_mle_partial(const SufficientStats& stats) {
  DriftEstimate e;
  e.threshold_used = stats.threshold;
  e.plus = solve_side(stats.plus);
  e.minus = solve_side(stats.minus);
  return e;
}

double quasi_likelihood_side(const SideSums& s, double a, double b) {
  return b * s.m[0] - a * s.m[1] - 0.5 * (b * b * s.q[0] + a * a * s.q[2] - 2.0 * a * b * s.q[1]);
}

double quasi_likelihood(const SufficientStats& stats, const DriftParams& theta) {
  return quasi_likelihood_side(stats.plus, theta.a_plus, theta.b_plus) +
         quasi_likelihood_side(stats.minus, theta.a_minus, theta.b_minus);
}

double log_likelihood(const SufficientStats& stats, const DriftParams& theta, const VolatilityPair& sigma) {
  if (!(sigma.plus > 0.0) || !(sigma.minus > 0.0)) {
    throw std::invalid_argument("log_likelihood: volatilities must be > 0");
  }
  return quasi_likelihood_side(stats.plus, theta.a_plus, theta.b_plus) / (sigma.plus * sigma.plus) +
         quasi_likelihood_side(stats.minus, theta.a_minus, theta.b_minus) / (sigma.minus * sigma.minus);
}

std::pair<double, double> percentiles(const Trajectory& traj, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("percentiles: delta must lie in (0, 0.5)");
  traj.validate();
  std::vector<double> v = traj.values;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  // Nearest rank: the ceil(p n)-th smallest value. The small slack keeps
  // products such as 0.85 * 100 from rounding up to the next rank.
  auto rank = [&](double p) {
    const double k = std::ceil(p * n - 1e-9);
    return static_cast<std::size_t>(std::clamp(k, 1.0, n)) - 1;
  };
  return {v[rank(delta)], v[rank(1.0 - delta)]};
}

void ThresholdGrid::validate() const {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("ThresholdGrid: delta must lie in (0, 0.5)");
  if (n_points < 1) throw std::invalid_argument("ThresholdGrid: n_points must be >= 1");
}

std::vector<double> threshold_candidates(const Trajectory& traj, const ThresholdGrid& grid) {
  grid.validate();
  const auto [c, d] = percentiles(traj, grid.delta);
  if (grid.n_points == 1) return {0.5 * (c + d)};
  std::vector<double> out(grid.n_points);
  const double step = (d - c) / static_cast<double>(grid.n_points - 1);
  for (std::size_t i = 0; i < grid.n_points; ++i) out[i] = c + step * static_cast<double>(i);
  out.back() = d;
  return out;
}

FitResult fit_at_threshold(const Trajectory& traj, double r, Method method) {
  FitResult fit;
  fit.method = method;
  fit.stats = sufficient_stats(traj, r);
  fit.estimate = drift_mle(fit.stats);
  if (method == Method::MLE) {
    fit.sigma_hat = volatility_estimate(fit.stats);
  } else {
    const double pooled = pooled_volatility(fit.stats);
    fit.sigma_hat = {pooled, pooled};
  }
  const DriftParams theta = fit.estimate.params();
  fit.quasi_lik = quasi_likelihood(fit.stats, theta);
  fit.loglik = log_likelihood(fit.stats, theta, fit.sigma_hat);
  return fit;
}

FitResult threshold_search(const Trajectory& traj, std::span<const double> candidates, Method method) {
  traj.validate();
  if (candidates.empty()) throw NoValidCandidate();
  for (double r : candidates) {
    if (!std::isfinite(r)) throw std::invalid_argument("threshold_search: non-finite candidate");
  }

  std::vector<double> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());

  // Left endpoints with their increments, ordered by level.
  const auto& x = traj.values;
  const std::size_t n = traj.steps();
  std::vector<std::pair<double, double>> obs(n);
  for (std::size_t k = 0; k < n; ++k) obs[k] = {x[k], x[k + 1] - x[k]};
  std::sort(obs.begin(), obs.end());

  const std::size_t g = sorted.size();
  std::vector<SideSums> minus(g);
  std::vector<SideSums> plus(g);
  {
    SideSumsBuilder acc;
    std::size_t i = 0;
    for (std::size_t c = 0; c < g; ++c) {
      for (; i < n && obs[i].first < sorted[c]; ++i) acc.add(obs[i].first, obs[i].second);
      minus[c] = acc.finish(traj.dt);
    }
  }
  {
    SideSumsBuilder acc;
    std::size_t i = n;
    for (std::size_t c = g; c-- > 0;) {
      for (; i > 0 && obs[i - 1].first >= sorted[c]; --i) acc.add(obs[i - 1].first, obs[i - 1].second);
      plus[c] = acc.finish(traj.dt);
    }
  }

  std::vector<ProfilePoint> profile(g);
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < g; ++c) {
    profile[c].r = sorted[c];
    if (const auto score = score_split(plus[c], minus[c], method)) {
      profile[c].score = *score;
      profile[c].valid = true;
      if (!best || *score > profile[*best].score) best = c;
    }
  }
  if (!best) throw NoValidCandidate();

  FitResult fit = fit_at_threshold(traj, sorted[*best], method);
  fit.threshold_estimated = true;
  fit.profile = std::move(profile);
  return fit;
}

FitResult threshold_search(const Trajectory& traj, const ThresholdGrid& grid, Method method) {
  const std::vector<double> candidates = threshold_candidates(traj, grid);
  return threshold_search(traj, candidates, method);
}

}  // namespace tou
