#include "powerburr/distributions.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "powerburr/errors.hpp"
#include "powerburr/numerics.hpp"

namespace powerburr {

namespace nm = numerics;

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be finite and > 0 (got " << v << ")";
    throw DomainError(os.str());
  }
}

// log g(x) in terms of log x.
double burr_log_pdf_logx(double log_x, double alpha, double theta) {
  const double t = std::log(theta) + log_x - std::log(alpha);  // log(theta x / alpha)
  return nm::log_gamma_ratio(alpha, theta) + nm::b_log_b_minus_lgamma(theta) +
         (theta - 1.0) * log_x - (alpha + theta) * nm::log1pexp(t);
}

// Both tails of the Burr distribution from log x. u = theta x/(alpha + theta x)
// is Beta(theta, alpha); the smaller of u, 1-u is fed to the incomplete beta.
struct Tails {
  double lower;
  double upper;
};

Tails burr_tails_logx(double log_x, double alpha, double theta) {
  const double t = std::log(theta) + log_x - std::log(alpha);
  const double u = nm::sigmoid(t);
  const double v = nm::sigmoid(-t);
  if (u <= 0.5) {
    return {boost::math::ibeta(theta, alpha, u), boost::math::ibetac(theta, alpha, u)};
  }
  return {boost::math::ibetac(alpha, theta, v), boost::math::ibeta(alpha, theta, v)};
}

}  // namespace

double burr_log_pdf(double x, double alpha, double theta) {
  require_positive(x, "x");
  require_positive(alpha, "alpha");
  require_positive(theta, "theta");
  return burr_log_pdf_logx(std::log(x), alpha, theta);
}

double burr_cdf(double x, double alpha, double theta) {
  require_positive(x, "x");
  require_positive(alpha, "alpha");
  require_positive(theta, "theta");
  return burr_tails_logx(std::log(x), alpha, theta).lower;
}

double burr_sf(double x, double alpha, double theta) {
  require_positive(x, "x");
  require_positive(alpha, "alpha");
  require_positive(theta, "theta");
  return burr_tails_logx(std::log(x), alpha, theta).upper;
}

double burr_quantile(double p, double alpha, double theta) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  require_positive(alpha, "alpha");
  require_positive(theta, "theta");

  constexpr int kMaxIter = 200;
  constexpr double kProbTol = 1e-9;
  // Residual in whichever tail is smaller, so upper quantiles keep full precision.
  const bool use_upper = p > 0.5;
  const double target = use_upper ? 1.0 - p : p;
  auto residual = [&](double y) {
    const Tails tl = burr_tails_logx(y, alpha, theta);
    return use_upper ? target - tl.upper : tl.lower - target;  // increasing in y
  };

  // Bracket in y = log x around the location log(alpha/theta)-ish start.
  double lo = 0.0, hi = 0.0;
  double r_lo = residual(lo), r_hi = r_lo;
  double step = 1.0;
  int iter = 0;
  if (r_lo > 0.0) {
    hi = lo;
    r_hi = r_lo;
    while (r_lo > 0.0) {
      if (++iter > kMaxIter) throw ConvergenceError("burr_quantile: bracketing failed");
      lo -= step;
      step *= 2.0;
      r_lo = residual(lo);
    }
  } else {
    while (r_hi < 0.0) {
      if (++iter > kMaxIter) throw ConvergenceError("burr_quantile: bracketing failed");
      hi += step;
      step *= 2.0;
      r_hi = residual(hi);
    }
  }
  if (r_lo == 0.0) return std::exp(lo);
  if (r_hi == 0.0) return std::exp(hi);

  double y = 0.5 * (lo + hi);
  for (iter = 0; iter < kMaxIter; ++iter) {
    const double r = residual(y);
    if (r == 0.0) break;
    if (r < 0.0) lo = y; else hi = y;
    // d residual / dy = g(x) x in both tails.
    const double slope = std::exp(burr_log_pdf_logx(y, alpha, theta) + y);
    double next = (slope > 0.0 && std::isfinite(slope)) ? y - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double delta = std::fabs(next - y);
    y = next;
    if (delta <= 1e-14 * std::max(1.0, std::fabs(y)) || hi - lo <= 1e-15 * std::max(1.0, std::fabs(y))) break;
  }
  if (std::fabs(residual(y)) > kProbTol) {
    throw ConvergenceError("burr_quantile: no convergence within 200 iterations");
  }
  return std::exp(y);
}

double log_forward_transform(double log_x, const ParamVector& phi) {
  // log(1 + x^eta / tau) = log1pexp(eta log x - log tau)
  const double s = phi.gamma * nm::log1pexp(phi.eta * log_x - std::log(phi.tau));
  return std::log(phi.beta) + nm::log_expm1(s);
}

double forward_transform(double x, const ParamVector& phi) {
  require_positive(x, "x");
  phi.validate();
  const double log_z = log_forward_transform(std::log(x), phi);
  const double z = std::exp(log_z);
  if (!std::isfinite(z)) throw NumericError("forward_transform: result overflows");
  if (z <= 0.0) throw NumericError("forward_transform: result underflows to zero");
  return z;
}

double log_inverse_transform(double z, const ParamVector& phi) {
  require_positive(z, "z");
  const double s = std::log1p(z / phi.beta) / phi.gamma;
  if (!(s > 0.0)) throw NumericError("inverse_transform: (1 + z/beta)^(1/gamma) - 1 underflows");
  return (std::log(phi.tau) + nm::log_expm1(s)) / phi.eta;
}

double inverse_transform(double z, const ParamVector& phi) {
  phi.validate();
  const double x = std::exp(log_inverse_transform(z, phi));
  if (x <= 0.0) throw NumericError("inverse_transform: x underflows to zero");
  if (!std::isfinite(x)) throw NumericError("inverse_transform: x overflows");
  return x;
}

DensityPoint evaluate_density(double z, const ParamVector& phi) {
  phi.validate();
  require_positive(z, "z");
  const double s = std::log1p(z / phi.beta) / phi.gamma;  // log(1 + x^eta/tau)
  if (!(s > 0.0)) throw NumericError("powerburr_log_pdf: x underflows to zero");
  const double log_x = (std::log(phi.tau) + nm::log_expm1(s)) / phi.eta;
  const double t = std::log(phi.theta) + log_x - std::log(phi.alpha);
  const double log_c = nm::log_gamma_ratio(phi.alpha, phi.theta) +
                       nm::b_log_b_minus_lgamma(phi.theta) + std::log(phi.tau) -
                       std::log(phi.gamma) - std::log(phi.beta) - std::log(phi.eta);
  const double ld = log_c + (phi.theta - phi.eta) * log_x -
                    (phi.alpha + phi.theta) * nm::log1pexp(t) - (phi.gamma - 1.0) * s;
  return {z, std::exp(log_x), ld};
}

double powerburr_log_pdf(double z, const ParamVector& phi) {
  return evaluate_density(z, phi).log_density;
}

double powerburr_cdf(double z, const ParamVector& phi) {
  phi.validate();
  return burr_tails_logx(log_inverse_transform(z, phi), phi.alpha, phi.theta).lower;
}

double powerburr_sf(double z, const ParamVector& phi) {
  phi.validate();
  return burr_tails_logx(log_inverse_transform(z, phi), phi.alpha, phi.theta).upper;
}

UnimodalityVerdict unimodality_check(const ParamVector& phi) {
  phi.validate();
  if (phi.gamma >= 1.0) return {true, UnimodalityCondition::GammaGeOne};
  if (phi.eta == 1.0) {
    if (phi.theta >= 1.0) return {true, UnimodalityCondition::ThetaGeOne};
    const double a = phi.alpha, th = phi.theta, tau = phi.tau, g = phi.gamma;
    const double lhs = a * (1.0 - g / th) - tau * (1.0 + a);
    const double rhs = 2.0 * std::sqrt(std::fabs(1.0 - th) * tau * (a + g) * a / th);
    if (lhs <= rhs) return {true, UnimodalityCondition::Algebraic};
  }
  return {false, UnimodalityCondition::NotGuaranteed};
}

}  // namespace powerburr
