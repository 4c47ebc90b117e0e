#include "tou/simulate.hpp"

#include <stdexcept>

namespace tou {

void Trajectory::validate() const {
  if (values.size() < 2) throw std::invalid_argument("Trajectory: need at least two observations");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("Trajectory: dt must be > 0");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("Trajectory: non-finite observation");
  }
}

Trajectory Trajectory::subsample(std::size_t stride) const {
  if (stride == 0 || steps() % stride != 0) {
    throw std::invalid_argument("Trajectory::subsample: stride must divide the number of steps");
  }
  Trajectory out;
  out.t0 = t0;
  out.dt = dt * static_cast<double>(stride);
  out.values.reserve(steps() / stride + 1);
  for (std::size_t k = 0; k < values.size(); k += stride) out.values.push_back(values[k]);
  return out;
}

void SimSpec::validate() const {
  params.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("SimSpec: horizon must be > 0");
  if (steps < 1) throw std::invalid_argument("SimSpec: steps must be >= 1");
  if (substeps < 1) throw std::invalid_argument("SimSpec: substeps must be >= 1");
  if (const auto* burn = std::get_if<BurnIn>(&init); burn && !(burn->burn_time >= 0.0)) {
    throw std::invalid_argument("SimSpec: burn-in time must be >= 0");
  }
}

Trajectory simulate(const SimSpec& spec, RngStream& rng) { return simulate_with(spec, rng); }

unsigned default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

std::vector<Trajectory> simulate_batch(const SimSpec& spec, std::size_t n_paths, std::uint64_t seed,
                                       unsigned workers) {
  if (n_paths < 1) throw std::invalid_argument("simulate_batch: n_paths must be >= 1");
  spec.validate();
  return parallel_map_paths(
      n_paths, seed,
      [&](std::size_t i, RngStream& rng) {
        try {
          return simulate(spec, rng);
        } catch (const Diverged& e) {
          throw Diverged(e.step(), i);
        }
      },
      workers);
}

}  // namespace tou
