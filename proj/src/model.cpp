#include "tou/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tou {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SideBehavior side_behavior(double a, double b, Side side) {
  if (a > 0.0) return SideBehavior::Confining;
  if (a < 0.0) return SideBehavior::Escaping;
  if (b == 0.0) return SideBehavior::Neutral;
  // Constant drift must point back toward the threshold.
  const bool inward = side == Side::plus ? b < 0.0 : b > 0.0;
  return inward ? SideBehavior::Confining : SideBehavior::Escaping;
}

// z = sqrt(a)/sigma (b/a - r), shared by the Gaussian-side closed forms.
double gaussian_offset(double a, double b, double sigma, double r) {
  return std::sqrt(a) / sigma * (b / a - r);
}

double log_gaussian_prefactor(double a, double sigma) {
  return 0.5 * std::log(std::numbers::pi) - std::log(sigma) - 0.5 * std::log(a);
}

double log_add(double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

void ModelParams::validate() const {
  const std::array<double, 7> fields = {r, a_plus, a_minus, b_plus, b_minus, sigma_plus, sigma_minus};
  for (double v : fields) {
    if (!std::isfinite(v)) throw std::invalid_argument("ModelParams: all fields must be finite");
  }
  if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0)) {
    throw std::invalid_argument("ModelParams: volatilities must be strictly positive");
  }
}

ModelParams reference_params() {
  ModelParams p;
  p.r = 0.01;
  p.b_minus = -0.002;
  p.b_plus = 0.003;
  p.a_minus = 0.1;
  p.a_plus = 0.11;
  p.sigma_minus = 0.011;
  p.sigma_plus = 0.01;
  return p;
}

const char* to_string(Recurrence r) {
  switch (r) {
    case Recurrence::Ergodic:
      return "ergodic";
    case Recurrence::NullRecurrent:
      return "null-recurrent";
    case Recurrence::Transient:
      return "transient";
  }
  return "?";
}

const char* to_string(SideBehavior b) {
  switch (b) {
    case SideBehavior::Confining:
      return "confining";
    case SideBehavior::Neutral:
      return "neutral";
    case SideBehavior::Escaping:
      return "escaping";
  }
  return "?";
}

RegimeClass classify_regime(const ModelParams& p) {
  RegimeClass rc;
  rc.side_plus = side_behavior(p.a_plus, p.b_plus, Side::plus);
  rc.side_minus = side_behavior(p.a_minus, p.b_minus, Side::minus);
  if (rc.side_plus == SideBehavior::Escaping || rc.side_minus == SideBehavior::Escaping) {
    rc.overall = Recurrence::Transient;
  } else if (rc.side_plus == SideBehavior::Neutral || rc.side_minus == SideBehavior::Neutral) {
    rc.overall = Recurrence::NullRecurrent;
  } else {
    rc.overall = Recurrence::Ergodic;
  }
  return rc;
}

double log_scale_density(const ModelParams& p, double x) {
  const Side s = p.side_of(x);
  const double sigma = p.sigma(s);
  return -(x - p.r) * (2.0 * p.b(s) - p.a(s) * (x + p.r)) / (sigma * sigma);
}

double scale_density(const ModelParams& p, double x) { return std::exp(log_scale_density(p, x)); }

double log_speed_density(const ModelParams& p, double x) {
  const double sigma = p.sigma(p.side_of(x));
  return std::log(2.0) - 2.0 * std::log(sigma) - log_scale_density(p, x);
}

double speed_density(const ModelParams& p, double x) { return std::exp(log_speed_density(p, x)); }

double log_speed_mass(const ModelParams& p, Side side) {
  const double a = p.a(side);
  const double b = p.b(side);
  const double sigma = p.sigma(side);
  switch (side_behavior(a, b, side)) {
    case SideBehavior::Neutral:
    case SideBehavior::Escaping:
      return kInf;
    case SideBehavior::Confining:
      break;
  }
  if (a == 0.0) return -std::log(std::abs(b));
  const double z = gaussian_offset(a, b, sigma, p.r);
  const double arg = side == Side::plus ? -z : z;
  return log_gaussian_prefactor(a, sigma) + z * z + log_erfc(arg);
}

double speed_mass(const ModelParams& p, Side side) { return std::exp(log_speed_mass(p, side)); }

double StationaryDist::log_density(double x) const {
  return log_speed_density(params_, x) - log_total_;
}

double StationaryDist::density(double x) const { return std::exp(log_density(x)); }

double StationaryDist::tail_mass(double x) const {
  const Side side = params_.side_of(x);
  const double a = params_.a(side);
  const double b = params_.b(side);
  const double sigma = params_.sigma(side);
  const double r = params_.r;
  if (a == 0.0) {
    const double rate = 2.0 * std::abs(b) / (sigma * sigma);
    return std::exp(-std::log(std::abs(b)) - rate * std::abs(x - r) - log_total_);
  }
  const double z = gaussian_offset(a, b, sigma, r);
  const double root_kappa = std::sqrt(a) / sigma;
  const double mu = b / a;
  const double arg = side == Side::plus ? root_kappa * (x - mu) : root_kappa * (mu - x);
  return std::exp(log_gaussian_prefactor(a, sigma) + z * z + log_erfc(arg) - log_total_);
}

double StationaryDist::cdf(double x) const {
  if (x >= params_.r) return 1.0 - tail_mass(x);
  return tail_mass(x);
}

StationaryDist stationary_dist(const ModelParams& p) {
  p.validate();
  if (classify_regime(p).overall != Recurrence::Ergodic) throw NotErgodic();

  StationaryDist d;
  d.params_ = p;
  const double log_plus = log_speed_mass(p, Side::plus);
  const double log_minus = log_speed_mass(p, Side::minus);
  d.n_plus_ = std::exp(log_plus);
  d.n_minus_ = std::exp(log_minus);
  d.log_total_ = log_add(log_plus, log_minus);
  d.weight_plus_ = 1.0 / (1.0 + std::exp(log_minus - log_plus));

  for (Side s : {Side::plus, Side::minus}) {
    SidePiece& piece = s == Side::plus ? d.plus_ : d.minus_;
    const double a = p.a(s);
    const double sigma = p.sigma(s);
    if (a > 0.0) {
      piece.kind = SidePiece::Kind::TruncatedGaussian;
      piece.center = p.b(s) / a;
      piece.scale = sigma / std::sqrt(2.0 * a);
    } else {
      piece.kind = SidePiece::Kind::Exponential;
      piece.rate = 2.0 * std::abs(p.b(s)) / (sigma * sigma);
    }
  }
  return d;
}

QBar qbar_constants(const ModelParams& p) {
  const StationaryDist d = stationary_dist(p);
  const double inv_total = std::exp(-std::log(d.n_plus() + d.n_minus()));
  const double r = p.r;

  QBar q;
  for (Side s : {Side::plus, Side::minus}) {
    auto& out = s == Side::plus ? q.plus : q.minus;
    const double sign = s == Side::plus ? 1.0 : -1.0;
    const double a = p.a(s);
    const double b = p.b(s);
    const double sigma = p.sigma(s);
    const double w = d.weight(s);
    out[0] = w;
    if (a > 0.0) {
      const double mu = b / a;
      out[1] = mu * w + sign * inv_total / a;
      out[2] = (mu * mu + sigma * sigma / (2.0 * a)) * w + sign * (mu + r) * inv_total / a;
    } else {
      const double n0 = 1.0 / std::abs(b);
      const double s2n = sigma * sigma * n0;
      out[1] = w * (r + sign * 0.5 * s2n);
      out[2] = w * (r * r + sign * r * s2n + 0.5 * s2n * s2n);
    }
  }
  return q;
}

Eigen::Matrix2d AsymptoticConstants::clt_covariance(Side s, const ModelParams& p) const {
  const double sigma = p.sigma(s);
  return sigma * sigma * gamma(s).inverse();
}

AsymptoticConstants gamma_theoretical(const ModelParams& p) {
  AsymptoticConstants c;
  c.qbar = qbar_constants(p);
  auto build = [](const std::array<double, 3>& q) {
    Eigen::Matrix2d g;
    g << q[2], -q[1], -q[1], q[0];
    return g;
  };
  c.gamma_plus = build(c.qbar.plus);
  c.gamma_minus = build(c.qbar.minus);
  c.fisher.setZero();
  c.fisher.topLeftCorner<2, 2>() = c.gamma_plus / (p.sigma_plus * p.sigma_plus);
  c.fisher.bottomRightCorner<2, 2>() = c.gamma_minus / (p.sigma_minus * p.sigma_minus);
  return c;
}

}  // namespace tou
