#include "powerburr/sampling.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>

#include "powerburr/distributions.hpp"
#include "powerburr/errors.hpp"

namespace powerburr {

// Ziggurat samplers; both are stateless, so a draw depends only on the stream.
double draw_standard_normal(RngStream& stream) {
  return boost::random::normal_distribution<double>()(stream);
}

double draw_exponential(RngStream& stream) {
  return boost::random::exponential_distribution<double>()(stream);
}

namespace {

// Marsaglia-Tsang for shape >= 1. Returns v with d*v ~ Gamma(shape, scale 1),
// d = shape - 1/3, and log(v) in `log_v`.
double mt_core(RngStream& stream, double d, double c, double& log_v) {
  for (;;) {
    double x, t;
    do {
      x = draw_standard_normal(stream);
      t = 1.0 + c * x;
    } while (t <= 0.0);
    const double v = t * t * t;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      log_v = 3.0 * std::log(t);
      return v;
    }
    const double lv = 3.0 * std::log(t);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + lv)) {
      log_v = lv;
      return v;
    }
  }
}

void require_shape(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be > 0");
}

}  // namespace

namespace detail {

GammaConstants::GammaConstants(double shape) : shape(shape) {
  require_shape(shape);
  boosted = shape < 1.0;
  d = (boosted ? shape + 1.0 : shape) - 1.0 / 3.0;
  c = 1.0 / std::sqrt(9.0 * d);
  log_scale = boosted ? std::log(d) - std::log(shape) : std::log1p(-1.0 / (3.0 * shape));
  inv_shape = 1.0 / shape;
  scale = d / shape;
}

double draw_log_gamma(RngStream& stream, const GammaConstants& g) {
  double log_v;
  mt_core(stream, g.d, g.c, log_v);
  if (!g.boosted) return log_v + g.log_scale;
  return log_v + g.log_scale + std::log(stream.uniform()) * g.inv_shape;
}

double draw_gamma(RngStream& stream, const GammaConstants& g) {
  if (g.boosted) return std::exp(draw_log_gamma(stream, g));
  double log_v;
  return mt_core(stream, g.d, g.c, log_v) * g.scale;
}

}  // namespace detail

double draw_log_gamma_unit_mean(RngStream& stream, double shape) {
  return detail::draw_log_gamma(stream, detail::GammaConstants(shape));
}

double draw_gamma_unit_mean(RngStream& stream, double shape) {
  return detail::draw_gamma(stream, detail::GammaConstants(shape));
}

double draw_powerburr(RngStream& stream, const ParamVector& phi) {
  const double log_num = draw_log_gamma_unit_mean(stream, phi.theta);
  const double log_den = draw_log_gamma_unit_mean(stream, phi.alpha);
  return std::exp(log_forward_transform(log_num - log_den, phi));
}

FamilySampler::FamilySampler(const FamilySpec& spec)
    : kind_(spec.kind()),
      p0_(spec[0]),
      p1_(spec.params().size() > 1 ? spec[1] : 0.0),
      num_(1.0),
      den_(1.0) {
  switch (kind_) {
    case FamilyKind::LogGamma: num_ = detail::GammaConstants(p1_); break;
    case FamilyKind::Gamma: num_ = detail::GammaConstants(p1_); break;
    case FamilyKind::Weibull: p0_ = 1.0 / p0_; break;  // store 1/k
    case FamilyKind::Pareto: p0_ = 1.0 / p0_; break;   // store 1/alpha
    case FamilyKind::LogNormal: break;
    default:
      phi_ = *spec.powerburr_params();
      num_ = detail::GammaConstants(phi_.theta);
      den_ = detail::GammaConstants(phi_.alpha);
      unit_transform_ = phi_.tau == 1.0 && phi_.gamma == 1.0;
      log_beta_ = std::log(phi_.beta);
  }
}

double FamilySampler::operator()(RngStream& stream) const {
  switch (kind_) {
    case FamilyKind::LogNormal:
      return std::exp(p0_ + p1_ * draw_standard_normal(stream));
    case FamilyKind::LogGamma:
      return std::expm1(p0_ * detail::draw_gamma(stream, num_));
    case FamilyKind::Weibull:
      return p1_ * std::pow(draw_exponential(stream), p0_);
    case FamilyKind::Pareto:
      return p1_ * std::expm1(draw_exponential(stream) * p0_);
    case FamilyKind::Gamma:
      return p0_ * detail::draw_gamma(stream, num_);
    default: {
      const double log_x = detail::draw_log_gamma(stream, num_) - detail::draw_log_gamma(stream, den_);
      // tau = gamma = 1 reduces the transform to z = beta x^eta
      if (unit_transform_) return std::exp(log_beta_ + phi_.eta * log_x);
      return std::exp(log_forward_transform(log_x, phi_));
    }
  }
}

double draw_family(RngStream& stream, const FamilySpec& spec) { return FamilySampler(spec)(stream); }

std::uint64_t draw_poisson(RngStream& stream, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("Poisson mean must be > 0");
  if (lambda < 10.0) {
    // Multiplication method.
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double prod = stream.uniform();
    while (prod > limit) {
      ++k;
      prod *= stream.uniform();
    }
    return k;
  }
  // PTRS transformed rejection (Hormann 1993).
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - boost::math::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace powerburr
