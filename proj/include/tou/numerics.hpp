#pragma once

/**
 * @file numerics.hpp
 * @brief Special functions, adaptive quadrature, goodness-of-fit helpers and
 * the seeded random stream used by every simulation.
 */

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "tou/errors.hpp"

namespace tou {

// ---------------------------------------------------------------------------
// Error function family (W. J. Cody's rational Chebyshev approximations).
// ---------------------------------------------------------------------------

double erf(double x);

/// Complementary error function, saturating to 0 / 2 for large |x|.
double erfc(double x);

/// Scaled complementary error function exp(x^2) erfc(x).
double erfcx(double x);

/// log(erfc(x)), finite for all finite x (uses erfcx in the right tail).
double log_erfc(double x);

double std_normal_cdf(double x);

double std_normal_pdf(double x);

// ---------------------------------------------------------------------------
// Gamma / chi-square.
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma function P(a, x).
double regularized_gamma_p(double a, double x);

/// CDF of the chi-square distribution with @p dof degrees of freedom.
double chi2_cdf(double x, unsigned dof);

/// Inverse of chi2_cdf, accurate to about 1e-10 (bisection bracket + Newton).
double chi2_quantile(double p, unsigned dof);

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov.
// ---------------------------------------------------------------------------

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

struct KsResult {
  double statistic = 0.0;  ///< sup |F_n - F|
  double p_value = 1.0;    ///< asymptotic, with the Stephens small-sample correction
};

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// ---------------------------------------------------------------------------
// Quadrature.
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double abs_tol = 1e-10;
  unsigned max_subdivisions = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) on [lo, hi].
double integrate_interval(const std::function<double(double)>& f, double lo, double hi,
                          const QuadratureSpec& spec = {});

/// Integral of @p f over [origin, +inf) for Side::plus or (-inf, origin] for
/// Side::minus. The half-line is mapped to [0, 1) by x = origin +- t / (1 - t).
double integrate_halfline(const std::function<double(double)>& f, Side side, double origin,
                          const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Summation.
// ---------------------------------------------------------------------------

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Random variates.
// ---------------------------------------------------------------------------

/// Anything that can hand out standard normal and uniform [0,1) variates.
template <class G>
concept VariateSource = requires(G& g) {
  { g.normal() } -> std::convertible_to<double>;
  { g.uniform() } -> std::convertible_to<double>;
};

/**
 * Reproducible random stream.
 *
 * The engine is MT19937-64 seeded through std::seed_seq with the four 32-bit
 * words of (seed, stream_index); both algorithms are fully specified by the
 * C++ standard, so a (seed, stream_index) pair yields the same sequence on
 * every conforming platform. Uniforms take the top 53 bits of each draw.
 * Normals use the Box-Muller transform on pairs of uniforms; the second
 * variate of each pair is cached.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tou
