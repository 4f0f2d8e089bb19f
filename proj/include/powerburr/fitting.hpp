#pragma once

// Maximum likelihood for the ten claim-size families. Optimisation runs on
// log-parameters; results are reported in each family's natural layout (see
// FamilySpec).

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powerburr/params.hpp"
#include "powerburr/sample.hpp"

namespace powerburr {

struct LogLikelihood {
  double value = 0.0;  // -inf if some observation has zero density
  std::size_t n = 0;
  std::optional<std::vector<double>> per_observation;
};

LogLikelihood loglik(const ClaimSample& sample, const FamilySpec& spec, bool keep_terms = false);

/// Partials of the log-likelihood with respect to the six PowerBurr parameters.
struct Gradient {
  double d_alpha = 0.0;
  double d_theta = 0.0;
  double d_beta = 0.0;
  double d_tau = 0.0;
  double d_gamma = 0.0;
  double d_eta = 0.0;

  std::array<double, 6> as_array() const noexcept {
    return {d_alpha, d_theta, d_beta, d_tau, d_gamma, d_eta};
  }
};

Gradient gradient(const ClaimSample& sample, const ParamVector& phi);

/// Log-likelihood of `z` under `kind` at `params` (family layout), and its
/// gradient with respect to those params written to `grad` when non-empty.
/// Returns -inf where the density underflows or the transform breaks down.
double loglik_with_gradient(std::span<const double> z, FamilyKind kind,
                            std::span<const double> params, std::span<double> grad);

using StartSet = std::vector<std::vector<double>>;

struct FitOptions {
  double gradient_tolerance = 1e-6;  // relative to max(1, |loglik|)
  int max_iterations = 500;
  int memory = 10;
  double log_param_bound = 30.0;
};

struct StartOutcome {
  std::vector<double> start;
  std::vector<double> estimate;  // empty if the start failed outright
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

struct FitResult {
  FamilySpec spec;
  double loglik = 0.0;
  bool converged = false;
  std::size_t start_index = 0;
  int iterations = 0;
  std::vector<StartOutcome> starts;
};

/// Maximises the likelihood from each start and keeps the best (ties within
/// 1e-9 * n go to the earliest start). Empty `starts` means default_starts().
/// LogNormal is solved in closed form. Throws FitFailure if no start yields
/// a finite likelihood.
FitResult fit(const ClaimSample& sample, FamilyKind kind, const StartSet& starts = {},
              const FitOptions& options = {});

/// The start cascade: the PowerBurr kinds are started from fits of simpler
/// families, which are fitted (and cached) on demand.
StartSet default_starts(FamilyKind kind, const ClaimSample& sample);

/// (alpha, theta, beta) matching the first three sample moments to the Burr
/// moments; (3, 1, mean) when they cannot be matched with alpha > 3.
std::array<double, 3> moment_start_extended_pareto(const ClaimSample& sample);

/// Fits families on one sample, reusing each fit as a start for the richer
/// families. Failed fits are remembered too.
class FitCascade {
 public:
  explicit FitCascade(const ClaimSample& sample, FitOptions options = {});

  /// Throws FitFailure if the family could not be fitted.
  const FitResult& fit(FamilyKind kind);
  /// nullptr instead of throwing.
  const FitResult* try_fit(FamilyKind kind);
  StartSet starts(FamilyKind kind);

 private:
  const ClaimSample& sample_;
  FitOptions options_;
  std::map<FamilyKind, std::optional<FitResult>> cache_;
  std::map<FamilyKind, std::string> errors_;
};

}  // namespace powerburr
