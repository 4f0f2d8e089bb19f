#include "powerburr/numerics.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace powerburr::numerics {

namespace {

constexpr double kStirlingThreshold = 30.0;

// lgamma(a) - [(a - 1/2) log a - a + log(2 pi)/2]
double stirling_tail(double a) {
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
}

// digamma(a) - [log a - 1/(2a)]
double digamma_tail(double a) {
  const double r2 = 1.0 / (a * a);
  return -r2 * (1.0 / 12.0 - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 / 240.0)));
}

}  // namespace

double log_gamma_ratio(double a, double b) {
  if (a < kStirlingThreshold) {
    return boost::math::lgamma(a + b) - boost::math::lgamma(a) - b * std::log(a);
  }
  const double u = b / a;
  // (a + b - 1/2) log1p(u) - b, written so the O(b^2/a) remainder survives.
  const double core = a * log1p_minus(u) + (b - 0.5) * std::log1p(u);
  return core + stirling_tail(a + b) - stirling_tail(a);
}

double log_gamma_ratio_da(double a, double b) {
  if (a < kStirlingThreshold) {
    return boost::math::digamma(a + b) - boost::math::digamma(a) - b / a;
  }
  const double u = b / a;
  return log1p_minus(u) - 0.5 / (a + b) + 0.5 / a + digamma_tail(a + b) - digamma_tail(a);
}

double log_gamma_ratio_db(double a, double b) {
  if (a < kStirlingThreshold) return boost::math::digamma(a + b) - std::log(a);
  const double s = a + b;
  return std::log1p(b / a) - 0.5 / s + digamma_tail(s);
}

double b_log_b_minus_lgamma(double b) {
  if (b < kStirlingThreshold) return b * std::log(b) - boost::math::lgamma(b);
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  return b + 0.5 * std::log(b) - kHalfLog2Pi - stirling_tail(b);
}

double log_minus_digamma_plus_one(double b) {
  if (b < kStirlingThreshold) return std::log(b) + 1.0 - boost::math::digamma(b);
  return 1.0 + 0.5 / b - digamma_tail(b);
}

}  // namespace powerburr::numerics
