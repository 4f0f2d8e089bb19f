#pragma once

// Log-space helpers shared by the density, gradient and sampling code.
// Parameters reach 1e10 and beyond during fitting, so nothing here forms
// Gamma(a) or exp(large) directly.

#include <cmath>

namespace powerburr::numerics {

/// log(1 + e^t) without overflow.
inline double log1pexp(double t) noexcept {
  if (t > 35.0) return t + std::exp(-t);
  if (t < -35.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

/// 1 / (1 + e^-t).
inline double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log(e^s - 1) for s > 0.
inline double log_expm1(double s) noexcept {
  if (s > 35.0) return s + std::log1p(-std::exp(-s));
  return std::log(std::expm1(s));
}

/// u/(1+u) - log(1+u), accurate for small u.
inline double ratio_minus_log1p(double u) noexcept {
  if (std::fabs(u) < 1e-3) {
    return u * u * (-0.5 + u * (2.0 / 3.0 - 0.75 * u));
  }
  return u / (1.0 + u) - std::log1p(u);
}

/// log(1+u) - u, accurate for small u.
inline double log1p_minus(double u) noexcept {
  if (std::fabs(u) < 1e-3) {
    return u * u * (-0.5 + u * (1.0 / 3.0 - 0.25 * u));
  }
  return std::log1p(u) - u;
}

/// lgamma(a + b) - lgamma(a) - b*log(a), stable when a >> b.
double log_gamma_ratio(double a, double b);

/// d/da of log_gamma_ratio: digamma(a + b) - digamma(a) - b/a.
double log_gamma_ratio_da(double a, double b);

/// d/db of log_gamma_ratio: digamma(a + b) - log(a).
double log_gamma_ratio_db(double a, double b);

/// b*log(b) - lgamma(b).
double b_log_b_minus_lgamma(double b);

/// log(b) + 1 - digamma(b), derivative of b_log_b_minus_lgamma.
double log_minus_digamma_plus_one(double b);

}  // namespace powerburr::numerics
