#pragma once

#include "powerburr/params.hpp"

namespace powerburr {

// ---- Standard Burr(alpha, theta): X = G_theta / G_alpha ------------------

/// log g(x) for the standard Burr density. Throws DomainError if x <= 0.
double burr_log_pdf(double x, double alpha, double theta);

/// Pr(X <= x) via the regularized incomplete beta function: theta*X/alpha is
/// beta-prime, i.e. X is F(2 theta, 2 alpha).
double burr_cdf(double x, double alpha, double theta);
/// Pr(X > x), accurate in the upper tail.
double burr_sf(double x, double alpha, double theta);

/// Inverse of burr_cdf by safeguarded Newton iteration on log x.
double burr_quantile(double p, double alpha, double theta);

// ---- Power transform -------------------------------------------------------

/// z = beta * ((1 + x^eta / tau)^gamma - 1). Throws NumericError on overflow.
double forward_transform(double x, const ParamVector& phi);
/// log z as a function of log x; never overflows.
double log_forward_transform(double log_x, const ParamVector& phi);

/// x = [tau * ((z/beta + 1)^(1/gamma) - 1)]^(1/eta), the exact inverse of
/// forward_transform for every eta.
double inverse_transform(double z, const ParamVector& phi);
/// log x as a function of z. Throws NumericError if x underflows to zero.
double log_inverse_transform(double z, const ParamVector& phi);

// ---- PowerBurr density -----------------------------------------------------

struct DensityPoint {
  double z;
  double x;
  double log_density;
};

DensityPoint evaluate_density(double z, const ParamVector& phi);

/// log f(z; phi) = log g(x) - log(dz/dx) with x = inverse_transform(z).
double powerburr_log_pdf(double z, const ParamVector& phi);

double powerburr_cdf(double z, const ParamVector& phi);
double powerburr_sf(double z, const ParamVector& phi);

// ---- Unimodality -----------------------------------------------------------

enum class UnimodalityCondition { GammaGeOne, ThetaGeOne, Algebraic, NotGuaranteed };

struct UnimodalityVerdict {
  bool is_guaranteed_unimodal;
  UnimodalityCondition condition_used;
};

/// Sufficient conditions for a unimodal (or monotone) density: gamma >= 1 for
/// any eta; with eta = 1 additionally theta >= 1 or the exact quadratic criterion
///   alpha (1 - gamma/theta) - tau (1 + alpha) <= 2 sqrt(|1 - theta| tau (alpha + gamma) alpha / theta).
UnimodalityVerdict unimodality_check(const ParamVector& phi);

}  // namespace powerburr
