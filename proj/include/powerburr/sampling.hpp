#pragma once

#include <cstdint>

#include "powerburr/params.hpp"
#include "powerburr/rng.hpp"

namespace powerburr {

double draw_standard_normal(RngStream& stream);
double draw_exponential(RngStream& stream);

/// log G where G ~ Gamma(shape, rate = shape), i.e. mean 1 and sd 1/sqrt(shape).
/// Valid for any shape > 0 (shapes below 1 use the U^(1/shape) boost).
double draw_log_gamma_unit_mean(RngStream& stream, double shape);
double draw_gamma_unit_mean(RngStream& stream, double shape);

/// Z = forward_transform(G_theta / G_alpha), evaluated in log space.
double draw_powerburr(RngStream& stream, const ParamVector& phi);

/// Exact sampler for every family kind.
double draw_family(RngStream& stream, const FamilySpec& spec);

namespace detail {

/// Marsaglia-Tsang constants for a unit-mean Gamma of the given shape.
struct GammaConstants {
  explicit GammaConstants(double shape);
  double shape, d, c, log_scale, inv_shape, scale;
  bool boosted;
};

double draw_log_gamma(RngStream& stream, const GammaConstants& g);
double draw_gamma(RngStream& stream, const GammaConstants& g);

}  // namespace detail

/// draw_family with the per-family constants worked out once; use it when
/// drawing many claims from one spec.
class FamilySampler {
 public:
  explicit FamilySampler(const FamilySpec& spec);
  double operator()(RngStream& stream) const;

 private:
  FamilyKind kind_;
  double p0_, p1_;
  ParamVector phi_;
  detail::GammaConstants num_, den_;
  bool unit_transform_ = false;
  double log_beta_ = 0.0;
};

std::uint64_t draw_poisson(RngStream& stream, double lambda);

}  // namespace powerburr
