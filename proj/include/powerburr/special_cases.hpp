#pragma once

#include <array>
#include <string_view>

#include "powerburr/params.hpp"

namespace powerburr {

/// Classical loss families reached inside PowerBurr5, with shape a, c and
/// scale b as in their usual definitions:
///
///   Burr          Z = b G_c / G_a
///   Pareto        Pr(Z > z) = (1 + z/b)^-a
///   Gamma         Z = b G_c
///   InverseGamma  Z = b / G_a
///   LogGamma      log(1 + Z) = b G_c
///   Logistic      Pr(Z > z) = 1 / (1 - a + a e^(z/b))
///   LogLogistic   Pr(Z > z) = 1 / (1 + (z/b)^a)
///   Weibull       Z = b G_1^a
///   Frechet       Pr(Z > z) = 1 - exp(-(z/b)^-a)
///   LogNormal     log Z ~ N(xi, sigma^2) with xi = a, sigma = b
enum class ClassicalFamily {
  Burr,
  Pareto,
  Gamma,
  InverseGamma,
  LogGamma,
  Logistic,
  LogLogistic,
  Weibull,
  Frechet,
  LogNormal,
};

inline constexpr std::array<ClassicalFamily, 10> kClassicalRows = {
    ClassicalFamily::Burr,     ClassicalFamily::Pareto,      ClassicalFamily::Gamma,
    ClassicalFamily::InverseGamma, ClassicalFamily::LogGamma, ClassicalFamily::Logistic,
    ClassicalFamily::LogLogistic, ClassicalFamily::Weibull,  ClassicalFamily::Frechet,
    ClassicalFamily::LogNormal};

std::string_view name(ClassicalFamily kind) noexcept;

struct ClassicalParams {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
};

inline constexpr double kDefaultLimitMagnitude = 1e6;

/// PowerBurr parameters approximating `kind`. Rows reached only in a limit use
/// `limit_magnitude` for parameters tending to infinity and its reciprocal for
/// those tending to zero; the log-normal row sends alpha to infinity faster
/// than theta (alpha = limit_magnitude^2).
ParamVector special_case_params(ClassicalFamily kind, const ClassicalParams& p,
                                double limit_magnitude = kDefaultLimitMagnitude);

/// Exact CDF of the classical family itself (the limit law).
double classical_cdf(double z, ClassicalFamily kind, const ClassicalParams& p);

}  // namespace powerburr
