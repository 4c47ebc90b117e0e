#include "tou/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace tou {

namespace {

// Cody, "Rational Chebyshev approximations for the error function",
// Math. Comp. 23 (1969). Coefficients from the netlib specfun CALERF routine.
constexpr std::array<double, 5> kA = {3.16112374387056560e00, 1.13864154151050156e02,
                                      3.77485237685302021e02, 3.20937758913846947e03,
                                      1.85777706184603153e-1};
constexpr std::array<double, 4> kB = {2.36012909523441209e01, 2.44024637934444173e02,
                                      1.28261652607737228e03, 2.84423683343917062e03};
constexpr std::array<double, 9> kC = {5.64188496988670089e-1, 8.88314979438837594e00,
                                      6.61191906371416295e01, 2.98635138197400131e02,
                                      8.81952221241769090e02, 1.71204761263407058e03,
                                      2.05107837782607147e03, 1.23033935479799725e03,
                                      2.15311535474403846e-8};
constexpr std::array<double, 8> kD = {1.57449261107098347e01, 1.17693950891312499e02,
                                      5.37181101862009858e02, 1.62138957456669019e03,
                                      3.29079923573345963e03, 4.36261909014324716e03,
                                      3.43936767414372164e03, 1.23033935480374942e03};
constexpr std::array<double, 6> kP = {3.05326634961232344e-1, 3.60344899949804439e-1,
                                      1.25781726111229246e-1, 1.60837851487422766e-2,
                                      6.58749161529837803e-4, 1.63153871373020978e-2};
constexpr std::array<double, 5> kQ = {2.56852019228982242e00, 1.87295284992346047e00,
                                      5.27905102951428412e-1, 6.05183413124413191e-2,
                                      2.33520497626869185e-3};

constexpr double kSqrtPiInv = 5.6418958354775628695e-1;
constexpr double kThresh = 0.46875;
constexpr double kXNeg = -26.628;
constexpr double kXSmall = 1.11e-16;
constexpr double kXBig = 26.543;
constexpr double kXHuge = 6.71e7;
constexpr double kXMax = 2.53e307;

enum class ErfKind { erf, erfc, erfcx };

// exp(-y^2) split so the product does not lose accuracy for moderate y.
double exp_minus_square(double y) {
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del);
}

double calerf(double x, ErfKind kind) {
  const double y = std::abs(x);
  double result = 0.0;

  if (y <= kThresh) {
    const double ysq = y > kXSmall ? y * y : 0.0;
    double xnum = kA[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + kA[i]) * ysq;
      xden = (xden + kB[i]) * ysq;
    }
    result = x * (xnum + kA[3]) / (xden + kB[3]);
    if (kind != ErfKind::erf) result = 1.0 - result;
    if (kind == ErfKind::erfcx) result *= std::exp(ysq);
    return result;
  }

  if (y <= 4.0) {
    double xnum = kC[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + kC[i]) * y;
      xden = (xden + kD[i]) * y;
    }
    result = (xnum + kC[7]) / (xden + kD[7]);
    if (kind != ErfKind::erfcx) result *= exp_minus_square(y);
  } else {
    bool done = false;
    if (y >= kXBig) {
      if (kind != ErfKind::erfcx || y >= kXMax) {
        done = true;
      } else if (y >= kXHuge) {
        result = kSqrtPiInv / y;
        done = true;
      }
    }
    if (!done) {
      const double ysq = 1.0 / (y * y);
      double xnum = kP[5] * ysq;
      double xden = ysq;
      for (int i = 0; i < 4; ++i) {
        xnum = (xnum + kP[i]) * ysq;
        xden = (xden + kQ[i]) * ysq;
      }
      result = ysq * (xnum + kP[4]) / (xden + kQ[4]);
      result = (kSqrtPiInv - result) / y;
      if (kind != ErfKind::erfcx) result *= exp_minus_square(y);
    }
  }

  switch (kind) {
    case ErfKind::erf:
      result = (0.5 - result) + 0.5;
      return x < 0.0 ? -result : result;
    case ErfKind::erfc:
      return x < 0.0 ? 2.0 - result : result;
    case ErfKind::erfcx:
      if (x < 0.0) {
        if (x < kXNeg) return std::numeric_limits<double>::infinity();
        const double ysq = std::trunc(x * 16.0) / 16.0;
        const double del = (x - ysq) * (x + ysq);
        const double e = std::exp(ysq * ysq) * std::exp(del);
        return e + e - result;
      }
      return result;
  }
  return result;
}

// 15-point Kronrod nodes with the embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

double erf(double x) { return calerf(x, ErfKind::erf); }
double erfc(double x) { return calerf(x, ErfKind::erfc); }
double erfcx(double x) { return calerf(x, ErfKind::erfcx); }

double log_erfc(double x) {
  if (x > 0.5) return std::log(erfcx(x)) - x * x;
  return std::log(erfc(x));
}

double std_normal_cdf(double x) { return 0.5 * erfc(-x / std::numbers::sqrt2); }

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be positive");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;

  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  constexpr double eps = 1e-16;

  if (x < a + 1.0) {
    // Series: P = e^{-x} x^a / Gamma(a+1) * sum x^n / ((a+1)...(a+n)).
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::min(1.0, sum * std::exp(log_prefactor));
  }

  // Continued fraction for Q (modified Lentz).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
}

double chi2_cdf(double x, unsigned dof) {
  if (dof == 0) throw std::invalid_argument("chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, unsigned dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi2_quantile: p must lie in (0, 1)");
  if (dof == 0) throw std::invalid_argument("chi2_quantile: dof must be >= 1");

  const double k = 0.5 * dof;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  auto pdf = [&](double x) { return std::exp(log_norm + (k - 1.0) * std::log(x) - 0.5 * x); };

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (chi2_cdf(hi, dof) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 60 && (hi - lo) > 1e-3 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, dof) < p ? lo : hi) = mid;
  }

  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double f = chi2_cdf(x, dof) - p;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = pdf(x);
    double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // P(K <= x) = sqrt(2 pi)/x sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 x^2)).
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double odd = 2.0 * j - 1.0;
      cdf += std::exp(-odd * odd * w);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sf += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

double integrate_interval(const std::function<double(double)>& f, double lo, double hi,
                          const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be > 0");
  if (lo == hi) return 0.0;
  if (lo > hi) return -integrate_interval(f, hi, lo, spec);

  std::priority_queue<Segment> heap;
  constexpr int kInitialPieces = 8;
  double total = 0.0;
  double error = 0.0;
  for (int i = 0; i < kInitialPieces; ++i) {
    const double a = lo + (hi - lo) * i / kInitialPieces;
    const double b = i + 1 == kInitialPieces ? hi : lo + (hi - lo) * (i + 1) / kInitialPieces;
    Segment s = gauss_kronrod(f, a, b);
    total += s.value;
    error += s.error;
    heap.push(s);
  }

  unsigned splits = 0;
  while (error > spec.abs_tol) {
    if (splits >= spec.max_subdivisions) {
      throw QuadratureError("quadrature did not reach abs_tol " + std::to_string(spec.abs_tol) +
                            " (estimated error " + std::to_string(error) + ")");
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Segment left = gauss_kronrod(f, worst.lo, mid);
    const Segment right = gauss_kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
    // Recompute the running error from scratch now and then; the incremental
    // update accumulates cancellation noise.
    if (splits % 64 == 0) {
      auto copy = heap;
      double e = 0.0;
      double t = 0.0;
      while (!copy.empty()) {
        e += copy.top().error;
        t += copy.top().value;
        copy.pop();
      }
      error = e;
      total = t;
    }
  }
  return total;
}

double integrate_halfline(const std::function<double(double)>& f, Side side, double origin,
                          const QuadratureSpec& spec) {
  const double sign = side == Side::plus ? 1.0 : -1.0;
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    const double x = origin + sign * t / one_minus;
    double v = f(x) / (one_minus * one_minus);
    if (!std::isfinite(v) && std::abs(x) > 1e100) v = 0.0;
    return v;
  };
  return integrate_interval(mapped, 0.0, 1.0, spec);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), stream_index_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_index),
                    static_cast<std::uint32_t>(stream_index >> 32)};
  engine_.seed(seq);
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace tou
