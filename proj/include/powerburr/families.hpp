#pragma once

#include <optional>

#include "powerburr/params.hpp"

namespace powerburr {

double log_pdf(double z, const FamilySpec& spec);
double cdf(double z, const FamilySpec& spec);
/// Survival function Pr(Z > z).
double sf(double z, const FamilySpec& spec);

/// The level-p quantile of Z. PowerBurr kinds go through the Burr quantile and
/// the monotone power transform.
double quantile(double p, const FamilySpec& spec);

/// E(Z^r) for r >= 1; std::nullopt when the moment is infinite. PowerBurr
/// kinds are finite iff r * eta * gamma < alpha and are integrated
/// numerically; the classical kinds use closed forms.
std::optional<double> moment(const FamilySpec& spec, int r);

/// E(X^r) through the transform for a raw ParamVector.
std::optional<double> powerburr_moment(const ParamVector& phi, int r);

struct MeanSd {
  double mean;
  double sd;
};

/// Mean and standard deviation; nullopt unless the second moment is finite.
std::optional<MeanSd> mean_sd(const FamilySpec& spec);

}  // namespace powerburr
