#include "powerburr/families.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "powerburr/distributions.hpp"
#include "powerburr/errors.hpp"
#include "powerburr/numerics.hpp"

namespace powerburr {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kSqrt2 = 1.41421356237309504880;

void require_z(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("loss amount must be finite and > 0");
}

double normal_quantile(double p) { return -kSqrt2 * boost::math::erfc_inv(2.0 * p); }

double gamma_unit_quantile(double shape, double p) {
  // Quantile of G_shape (mean 1).
  const double g = p <= 0.5 ? boost::math::gamma_p_inv(shape, p)
                            : boost::math::gamma_q_inv(shape, 1.0 - p);
  return g / shape;
}

}  // namespace

double log_pdf(double z, const FamilySpec& spec) {
  require_z(z);
  const auto p = spec.params();
  switch (spec.kind()) {
    case FamilyKind::LogNormal: {
      const double lz = std::log(z);
      const double d = (lz - p[0]) / p[1];
      return -lz - std::log(p[1]) - kHalfLog2Pi - 0.5 * d * d;
    }
    case FamilyKind::LogGamma: {
      const double y = std::log1p(z);
      const double xi = p[0], th = p[1];
      return numerics::b_log_b_minus_lgamma(th) - th * std::log(xi) + (th - 1.0) * std::log(y) -
             th * y / xi - y;
    }
    case FamilyKind::Weibull: {
      const double k = p[0], b = p[1];
      const double lr = std::log(z / b);
      return std::log(k) - std::log(b) + (k - 1.0) * lr - std::exp(k * lr);
    }
    case FamilyKind::Pareto:
      return std::log(p[0]) - std::log(p[1]) - (p[0] + 1.0) * std::log1p(z / p[1]);
    case FamilyKind::Gamma: {
      const double xi = p[0], a = p[1];
      return numerics::b_log_b_minus_lgamma(a) - a * std::log(xi) + (a - 1.0) * std::log(z) -
             a * z / xi;
    }
    default:
      return powerburr_log_pdf(z, *spec.powerburr_params());
  }
}

double cdf(double z, const FamilySpec& spec) {
  require_z(z);
  const auto p = spec.params();
  switch (spec.kind()) {
    case FamilyKind::LogNormal:
      return 0.5 * boost::math::erfc(-(std::log(z) - p[0]) / (p[1] * kSqrt2));
    case FamilyKind::LogGamma:
      return boost::math::gamma_p(p[1], p[1] * std::log1p(z) / p[0]);
    case FamilyKind::Weibull:
      return -std::expm1(-std::pow(z / p[1], p[0]));
    case FamilyKind::Pareto:
      return -std::expm1(-p[0] * std::log1p(z / p[1]));
    case FamilyKind::Gamma:
      return boost::math::gamma_p(p[1], p[1] * z / p[0]);
    default:
      return powerburr_cdf(z, *spec.powerburr_params());
  }
}

double sf(double z, const FamilySpec& spec) {
  require_z(z);
  const auto p = spec.params();
  switch (spec.kind()) {
    case FamilyKind::LogNormal:
      return 0.5 * boost::math::erfc((std::log(z) - p[0]) / (p[1] * kSqrt2));
    case FamilyKind::LogGamma:
      return boost::math::gamma_q(p[1], p[1] * std::log1p(z) / p[0]);
    case FamilyKind::Weibull:
      return std::exp(-std::pow(z / p[1], p[0]));
    case FamilyKind::Pareto:
      return std::exp(-p[0] * std::log1p(z / p[1]));
    case FamilyKind::Gamma:
      return boost::math::gamma_q(p[1], p[1] * z / p[0]);
    default:
      return powerburr_sf(z, *spec.powerburr_params());
  }
}

double quantile(double prob, const FamilySpec& spec) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  const auto p = spec.params();
  switch (spec.kind()) {
    case FamilyKind::LogNormal:
      return std::exp(p[0] + p[1] * normal_quantile(prob));
    case FamilyKind::LogGamma:
      return std::expm1(p[0] * gamma_unit_quantile(p[1], prob));
    case FamilyKind::Weibull:
      return p[1] * std::pow(-std::log1p(-prob), 1.0 / p[0]);
    case FamilyKind::Pareto:
      return p[1] * std::expm1(-std::log1p(-prob) / p[0]);
    case FamilyKind::Gamma:
      return p[0] * gamma_unit_quantile(p[1], prob);
    default: {
      const ParamVector phi = *spec.powerburr_params();
      const double x = burr_quantile(prob, phi.alpha, phi.theta);
      return forward_transform(x, phi);
    }
  }
}

std::optional<double> powerburr_moment(const ParamVector& phi, int r) {
  phi.validate();
  if (r < 1) throw DomainError("moment order must be >= 1");
  if (static_cast<double>(r) * phi.eta * phi.gamma >= phi.alpha) return std::nullopt;

  // Integrate z(x)^r g(x) over y = log x. The integrand is located by a coarse
  // scan between extreme Burr quantiles and split at its peak.
  auto h = [&](double y) {
    const double log_z = log_forward_transform(y, phi);
    const double t = std::log(phi.theta) + y - std::log(phi.alpha);
    const double log_g = numerics::log_gamma_ratio(phi.alpha, phi.theta) +
                         numerics::b_log_b_minus_lgamma(phi.theta) + (phi.theta - 1.0) * y -
                         (phi.alpha + phi.theta) * numerics::log1pexp(t);
    return r * log_z + log_g + y;
  };

  const double y_lo = std::log(burr_quantile(1e-10, phi.alpha, phi.theta));
  const double y_hi = std::log(burr_quantile(1.0 - 1e-10, phi.alpha, phi.theta));
  double peak = y_lo, h_peak = -std::numeric_limits<double>::infinity();
  constexpr int kScan = 400;
  const double span = (y_hi - y_lo) + 20.0;
  for (int i = 0; i <= kScan; ++i) {
    const double y = y_lo - 10.0 + span * i / kScan;
    const double v = h(y);
    if (std::isfinite(v) && v > h_peak) {
      h_peak = v;
      peak = y;
    }
  }
  if (!std::isfinite(h_peak)) throw NumericError("moment integrand is not finite");

  auto shifted = [&](double y) {
    const double v = h(y) - h_peak;
    return std::isfinite(v) ? std::exp(v) : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  constexpr double kTol = 1e-10;
  const double inf = std::numeric_limits<double>::infinity();
  const double right = integrator.integrate([&](double t) { return shifted(peak + t); }, 0.0, inf, kTol);
  const double left = integrator.integrate([&](double t) { return shifted(peak - t); }, 0.0, inf, kTol);
  const double value = std::exp(h_peak) * (left + right);
  if (!std::isfinite(value)) throw NumericError("moment overflows");
  return value;
}

std::optional<double> moment(const FamilySpec& spec, int r) {
  if (r < 1) throw DomainError("moment order must be >= 1");
  const auto p = spec.params();
  const double rr = r;
  switch (spec.kind()) {
    case FamilyKind::LogNormal:
      return std::exp(rr * p[0] + 0.5 * rr * rr * p[1] * p[1]);
    case FamilyKind::LogGamma: {
      const double xi = p[0], th = p[1];
      if (rr * xi / th >= 1.0) return std::nullopt;
      // E(Z^r) = sum_j C(r,j) (-1)^(r-j) E(e^{jY}), Y = xi G_theta.
      double total = 0.0;
      for (int j = 0; j <= r; ++j) {
        const double mgf = std::exp(-th * std::log1p(-j * xi / th));
        const double sign = ((r - j) % 2 == 0) ? 1.0 : -1.0;
        total += sign * boost::math::binomial_coefficient<double>(r, j) * mgf;
      }
      return total;
    }
    case FamilyKind::Weibull:
      return std::pow(p[1], rr) * boost::math::tgamma(1.0 + rr / p[0]);
    case FamilyKind::Pareto: {
      const double a = p[0];
      if (rr >= a) return std::nullopt;
      return std::pow(p[1], rr) *
             std::exp(boost::math::lgamma(rr + 1.0) + boost::math::lgamma(a - rr) -
                      boost::math::lgamma(a));
    }
    case FamilyKind::Gamma: {
      const double a = p[1];
      return std::pow(p[0], rr) * std::exp(numerics::log_gamma_ratio(a, rr));
    }
    default:
      return powerburr_moment(*spec.powerburr_params(), r);
  }
}

std::optional<MeanSd> mean_sd(const FamilySpec& spec) {
  const auto m2 = moment(spec, 2);
  if (!m2) return std::nullopt;
  const double m1 = *moment(spec, 1);
  return MeanSd{m1, std::sqrt(std::max(0.0, *m2 - m1 * m1))};
}

}  // namespace powerburr
