#include "powerburr/special_cases.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "powerburr/distributions.hpp"
#include "powerburr/errors.hpp"

namespace powerburr {

std::string_view name(ClassicalFamily kind) noexcept {
  switch (kind) {
    case ClassicalFamily::Burr: return "Burr";
    case ClassicalFamily::Pareto: return "Pareto";
    case ClassicalFamily::Gamma: return "Gamma";
    case ClassicalFamily::InverseGamma: return "Inverse Gamma";
    case ClassicalFamily::LogGamma: return "Log-gamma";
    case ClassicalFamily::Logistic: return "Logistic";
    case ClassicalFamily::LogLogistic: return "Log-logistic";
    case ClassicalFamily::Weibull: return "Weibull";
    case ClassicalFamily::Frechet: return "Frechet";
    case ClassicalFamily::LogNormal: return "Log-normal";
  }
  return "?";
}

ParamVector special_case_params(ClassicalFamily kind, const ClassicalParams& p,
                                double limit_magnitude) {
  if (!(limit_magnitude > 0.0) || !std::isfinite(limit_magnitude)) {
    throw DomainError("limit_magnitude must be finite and > 0");
  }
  const double big = limit_magnitude;
  const double small = 1.0 / limit_magnitude;
  const double a = p.a, b = p.b, c = p.c;
  ParamVector phi;
  switch (kind) {
    case ClassicalFamily::Burr:
      phi = {a, c, b, 1.0, 1.0, 1.0};
      break;
    case ClassicalFamily::Pareto:
      // theta = 1 gives Pr(X > x) = (1 + x/alpha)^-alpha, hence beta = b/a.
      phi = {a, 1.0, b / a, 1.0, 1.0, 1.0};
      break;
    case ClassicalFamily::Gamma:
      phi = {big, c, b, 1.0, 1.0, 1.0};
      break;
    case ClassicalFamily::InverseGamma:
      phi = {a, big, b, 1.0, 1.0, 1.0};
      break;
    case ClassicalFamily::LogGamma:
      // (1 + b X / gamma)^gamma - 1 -> e^{bX} - 1
      phi = {big, c, 1.0, big / b, big, 1.0};
      break;
    case ClassicalFamily::Logistic:
      // alpha = theta = 1 and gamma -> 0 with beta = b/gamma: Z -> b log(1 + X/tau).
      phi = {1.0, 1.0, b / small, a, small, 1.0};
      break;
    case ClassicalFamily::LogLogistic:
      // tau -> 0 with beta = b tau^gamma: Z -> b X^gamma, X standard log-logistic.
      phi = {1.0, 1.0, b * std::pow(small, 1.0 / a), small, 1.0 / a, 1.0};
      break;
    case ClassicalFamily::Weibull:
      phi = {big, 1.0, b * std::pow(small, a), small, a, 1.0};
      break;
    case ClassicalFamily::Frechet:
      phi = {1.0, big, b * std::pow(small, 1.0 / a), small, 1.0 / a, 1.0};
      break;
    case ClassicalFamily::LogNormal: {
      const double xi = a, sigma = b;
      // beta = exp(-sqrt(theta)*sigma + ...) underflows past ~745, so theta is
      // capped where the exponent reaches -600; the remaining error is O(1/sqrt(theta)).
      double theta = big;
      const double max_root = 600.0 + xi + 0.5;
      if (max_root > 0.0 && std::sqrt(theta) * sigma > max_root) {
        theta = (max_root / sigma) * (max_root / sigma);
      }
      const double root = std::sqrt(theta) * sigma;
      phi = {theta * theta, theta, std::exp(-root + xi + 0.5), root, theta * sigma * sigma, 1.0};
      break;
    }
    default:
      throw UnsupportedKind("unsupported classical family");
  }
  phi.validate();
  return phi;
}

double classical_cdf(double z, ClassicalFamily kind, const ClassicalParams& p) {
  if (!(z > 0.0)) return 0.0;
  const double a = p.a, b = p.b, c = p.c;
  switch (kind) {
    case ClassicalFamily::Burr:
      return burr_cdf(z / b, a, c);
    case ClassicalFamily::Pareto:
      return -std::expm1(-a * std::log1p(z / b));
    case ClassicalFamily::Gamma:
      return boost::math::gamma_p(c, c * z / b);
    case ClassicalFamily::InverseGamma:
      return boost::math::gamma_q(a, a * b / z);
    case ClassicalFamily::LogGamma:
      return boost::math::gamma_p(c, c * std::log1p(z) / b);
    case ClassicalFamily::Logistic:
      return 1.0 - 1.0 / (1.0 + a * std::expm1(z / b));
    case ClassicalFamily::LogLogistic:
      return 1.0 - 1.0 / (1.0 + std::pow(z / b, a));
    case ClassicalFamily::Weibull:
      return -std::expm1(-std::pow(z / b, 1.0 / a));
    case ClassicalFamily::Frechet:
      return std::exp(-std::pow(z / b, -a));
    case ClassicalFamily::LogNormal:
      return 0.5 * boost::math::erfc(-(std::log(z) - a) / (b * 1.41421356237309504880));
  }
  throw UnsupportedKind("unsupported classical family");
}

}  // namespace powerburr
