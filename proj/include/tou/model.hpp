#pragma once

/**
 * @file model.hpp
 * @brief The threshold Ornstein-Uhlenbeck diffusion
 *
 *   dX_t = (b(X_t) - a(X_t) X_t) dt + sigma(X_t) dW_t
 *
 * with coefficients (a+, b+, sigma+) on x >= r and (a-, b-, sigma-) on x < r.
 * The threshold point itself always belongs to the plus side.
 *
 * This header collects the scale/speed description of the diffusion, its
 * recurrence classification, the stationary law and the long-run occupation
 * constants that enter the asymptotic covariance of the drift estimator.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tou/errors.hpp"
#include "tou/numerics.hpp"

namespace tou {

struct ModelParams {
  double r = 0.0;
  double a_plus = 0.0;
  double a_minus = 0.0;
  double b_plus = 0.0;
  double b_minus = 0.0;
  double sigma_plus = 1.0;
  double sigma_minus = 1.0;

  double a(Side s) const noexcept { return s == Side::plus ? a_plus : a_minus; }
  double b(Side s) const noexcept { return s == Side::plus ? b_plus : b_minus; }
  double sigma(Side s) const noexcept { return s == Side::plus ? sigma_plus : sigma_minus; }

  Side side_of(double x) const noexcept { return x >= r ? Side::plus : Side::minus; }

  /// Throws std::invalid_argument unless every field is finite and both
  /// volatilities are strictly positive.
  void validate() const;
};

/// Parameter set used for the simulation study (threshold at 0.01, two
/// mean-reversion levels on either side of it).
ModelParams reference_params();

/// Initial value used alongside reference_params().
inline constexpr double kReferenceX0 = -0.02;

enum class Recurrence { Ergodic, NullRecurrent, Transient };
enum class SideBehavior { Confining, Neutral, Escaping };

const char* to_string(Recurrence r);
const char* to_string(SideBehavior b);

struct RegimeClass {
  Recurrence overall = Recurrence::Transient;
  SideBehavior side_plus = SideBehavior::Escaping;
  SideBehavior side_minus = SideBehavior::Escaping;
};

/// Ergodic iff both sides confine: a > 0, or a = 0 with the constant drift
/// pointing back toward r. A side with a = b = 0 is Neutral (recurrent with
/// infinite speed mass); anything else escapes and makes the process transient.
RegimeClass classify_regime(const ModelParams& p);

double log_scale_density(const ModelParams& p, double x);

/// s(x) = exp(-(x - r)(2 b - a (x + r)) / sigma^2) with the coefficients of the side of x.
double scale_density(const ModelParams& p, double x);

double log_speed_density(const ModelParams& p, double x);

/// m(x) = 2 / (sigma(x)^2 s(x)).
double speed_density(const ModelParams& p, double x);

/// Total speed mass of one side. Returns +infinity when the side does not
/// confine.
double speed_mass(const ModelParams& p, Side side);

/// Log of speed_mass (finite sides only); stable for extreme parameters.
double log_speed_mass(const ModelParams& p, Side side);

/// Shape of the stationary law restricted to one side.
struct SidePiece {
  enum class Kind { TruncatedGaussian, Exponential };
  Kind kind = Kind::Exponential;
  double center = 0.0;  ///< b/a (truncated Gaussian)
  double scale = 0.0;   ///< sigma / sqrt(2a) (truncated Gaussian)
  double rate = 0.0;    ///< 2|b| / sigma^2 (exponential, measured away from r)
};

/**
 * Stationary distribution: the speed measure renormalized to a probability.
 *
 * On each side it is either a Gaussian N(b/a, sigma^2/(2a)) truncated to the
 * side (a > 0) or an exponential law of rate 2|b|/sigma^2 leaving r (a = 0).
 * Construct with stationary_dist().
 */
class StationaryDist {
 public:
  const ModelParams& params() const noexcept { return params_; }

  double n_plus() const noexcept { return n_plus_; }
  double n_minus() const noexcept { return n_minus_; }
  double weight_plus() const noexcept { return weight_plus_; }
  double weight(Side s) const noexcept { return s == Side::plus ? weight_plus_ : 1.0 - weight_plus_; }
  const SidePiece& piece(Side s) const noexcept { return s == Side::plus ? plus_ : minus_; }

  double density(double x) const;
  double log_density(double x) const;
  double cdf(double x) const;

 private:
  friend StationaryDist stationary_dist(const ModelParams& p);

  // Speed mass of [x, inf) for x >= r, or of (-inf, x] for x < r.
  double tail_mass(double x) const;

  ModelParams params_;
  double n_plus_ = 0.0;
  double n_minus_ = 0.0;
  double log_total_ = 0.0;
  double weight_plus_ = 0.5;
  SidePiece plus_;
  SidePiece minus_;
};

/// Throws NotErgodic unless classify_regime(p).overall is Ergodic.
StationaryDist stationary_dist(const ModelParams& p);

namespace detail {

// Standard normal truncated to [lower, inf).
template <VariateSource G>
double sample_normal_tail(double lower, G& rng) {
  if (lower < 0.5) {
    for (;;) {
      const double z = rng.normal();
      if (z >= lower) return z;
    }
  }
  // Exponential proposal with the optimal rate (Robert, 1995).
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower - std::log(1.0 - rng.uniform()) / rate;
    const double accept = std::exp(-0.5 * (z - rate) * (z - rate));
    if (rng.uniform() < accept) return z;
  }
}

}  // namespace detail

/// Exact draw from the stationary distribution.
template <VariateSource G>
double sample_stationary(const StationaryDist& d, G& rng) {
  const double r = d.params().r;
  const Side side = rng.uniform() < d.weight_plus() ? Side::plus : Side::minus;
  const SidePiece& piece = d.piece(side);
  if (piece.kind == SidePiece::Kind::Exponential) {
    const double e = -std::log(1.0 - rng.uniform()) / piece.rate;
    return side == Side::plus ? r + e : r - e;
  }
  if (side == Side::plus) {
    const double z = detail::sample_normal_tail((r - piece.center) / piece.scale, rng);
    return std::max(r, piece.center + piece.scale * z);
  }
  // Minus side: reflect, then keep strictly below r.
  double x;
  do {
    const double z = detail::sample_normal_tail((piece.center - r) / piece.scale, rng);
    x = piece.center - piece.scale * z;
  } while (!(x < r));
  return x;
}

/// Long-run averages of the occupation sums, index 0..2 = moment order.
struct QBar {
  std::array<double, 3> plus{};
  std::array<double, 3> minus{};
  const std::array<double, 3>& side(Side s) const noexcept { return s == Side::plus ? plus : minus; }
};

struct AsymptoticConstants {
  QBar qbar;
  Eigen::Matrix2d gamma_plus;
  Eigen::Matrix2d gamma_minus;
  Eigen::Matrix4d fisher;  ///< blockdiag(gamma+ / sigma+^2, gamma- / sigma-^2)

  const Eigen::Matrix2d& gamma(Side s) const noexcept {
    return s == Side::plus ? gamma_plus : gamma_minus;
  }
  /// Asymptotic covariance sigma^2 gamma^{-1} of sqrt(T)(a_hat - a, b_hat - b) on one side.
  Eigen::Matrix2d clt_covariance(Side s, const ModelParams& p) const;
};

/// Closed-form long-run occupation constants. Throws NotErgodic.
QBar qbar_constants(const ModelParams& p);

/// gamma = [[Q2, -Q1], [-Q1, Q0]] per side, assembled into the Fisher matrix.
AsymptoticConstants gamma_theoretical(const ModelParams& p);

}  // namespace tou
