#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "tou/model.hpp"
#include "tou/numerics.hpp"

namespace tou {

/// Observations X_k at times t0 + k * dt, k = 0..N.
struct Trajectory {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const noexcept { return dt * static_cast<double>(steps()); }

  /// Throws std::invalid_argument on fewer than two values, dt <= 0 or a
  /// non-finite observation.
  void validate() const;

  /// Every @p stride-th observation; steps() must be divisible by stride.
  Trajectory subsample(std::size_t stride) const;
};

struct Deterministic {
  double x0 = 0.0;
};
/// X_0 drawn exactly from the stationary distribution.
struct Stationary {};
/// Start at x0 and discard an Euler run of length burn_time.
struct BurnIn {
  double x0 = 0.0;
  double burn_time = 0.0;
};

using InitialCondition = std::variant<Deterministic, Stationary, BurnIn>;

struct SimSpec {
  ModelParams params;
  double horizon = 1.0;
  std::size_t steps = 1;
  InitialCondition init = Deterministic{};
  unsigned substeps = 1;  ///< Euler steps per observation interval

  double observation_step() const noexcept { return horizon / static_cast<double>(steps); }
  double euler_step() const noexcept { return observation_step() / substeps; }
  void validate() const;
};

inline constexpr double kDivergenceBound = 1e12;

namespace detail {

struct EulerCoefficients {
  double a;
  double b;
  double vol;  // sigma * sqrt(h)
};

// Advances x by n Euler steps of size h, calling record(x) after every
// `stride` steps. Throws Diverged with the global step index.
template <VariateSource G, class Record>
double euler_run(const ModelParams& p, double x, double h, std::size_t n, std::size_t stride,
                 std::size_t step_offset, G& rng, Record&& record) {
  const double sqrt_h = std::sqrt(h);
  const EulerCoefficients plus{p.a_plus, p.b_plus, p.sigma_plus * sqrt_h};
  const EulerCoefficients minus{p.a_minus, p.b_minus, p.sigma_minus * sqrt_h};
  const double r = p.r;
  for (std::size_t k = 0; k < n; ++k) {
    const EulerCoefficients& c = x >= r ? plus : minus;
    x = x + (c.b - c.a * x) * h + c.vol * rng.normal();
    if (!(std::abs(x) <= kDivergenceBound)) throw Diverged(step_offset + k + 1);
    if ((k + 1) % stride == 0) record(x);
  }
  return x;
}

}  // namespace detail

/**
 * Euler-Maruyama path of the threshold OU SDE.
 *
 * Coefficients are frozen at the left end of each internal step (x >= r uses
 * the plus set). The internal step is horizon / (steps * substeps) and every
 * substeps-th state is recorded. Works with any VariateSource so tests can
 * substitute scripted variates.
 */
template <VariateSource G>
Trajectory simulate_with(const SimSpec& spec, G& rng) {
  spec.validate();
  const ModelParams& p = spec.params;
  const double h = spec.euler_step();

  double x0 = 0.0;
  if (const auto* det = std::get_if<Deterministic>(&spec.init)) {
    x0 = det->x0;
  } else if (std::holds_alternative<Stationary>(spec.init)) {
    x0 = sample_stationary(stationary_dist(p), rng);
  } else {
    const auto& burn = std::get<BurnIn>(spec.init);
    const auto burn_steps = static_cast<std::size_t>(std::ceil(burn.burn_time / h));
    x0 = detail::euler_run(p, burn.x0, h, burn_steps, burn_steps + 1, 0, rng, [](double) {});
  }

  Trajectory traj;
  traj.dt = spec.observation_step();
  traj.values.reserve(spec.steps + 1);
  traj.values.push_back(x0);
  detail::euler_run(p, x0, h, spec.steps * spec.substeps, spec.substeps, 0, rng,
                    [&](double x) { traj.values.push_back(x); });
  return traj;
}

Trajectory simulate(const SimSpec& spec, RngStream& rng);

/// Number of workers used when 0 is requested.
unsigned default_workers();

/**
 * Evaluates fn(i, rng_i) for i = 0..n-1 where rng_i = RngStream(seed, i), on
 * up to @p workers threads. Results are stored by index, so the output does not
 * depend on scheduling. If any call throws, the exception of the lowest
 * failing index is rethrown.
 */
template <class Fn>
auto parallel_map_paths(std::size_t n, std::uint64_t seed, Fn&& fn, unsigned workers = 0)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t, RngStream&>> {
  using R = std::invoke_result_t<Fn&, std::size_t, RngStream&>;
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        RngStream rng(seed, i);
        out[i] = fn(i, rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned w = std::max(1u, std::min<unsigned>(workers ? workers : default_workers(),
                                                     static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (w == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// n_paths independent trajectories; path i uses RngStream(seed, i). A
/// divergence is rethrown with its path index.
std::vector<Trajectory> simulate_batch(const SimSpec& spec, std::size_t n_paths, std::uint64_t seed,
                                       unsigned workers = 0);

}  // namespace tou
