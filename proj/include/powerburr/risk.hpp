#pragma once

// Compound-Poisson totals and the order-statistic reserve.

#include <cstdint>
#include <optional>
#include <vector>

#include "powerburr/params.hpp"
#include "powerburr/rng.hpp"

namespace powerburr {

/// J policies with claim intensity mu per policy-year over T years.
struct PortfolioSpec {
  double J = 1.0;
  double mu = 1.0;
  double T = 1.0;

  double lambda() const noexcept { return J * mu * T; }
  /// A one-policy, one-year portfolio with the given expected claim count.
  static PortfolioSpec with_lambda(double lambda) { return {1.0, lambda, 1.0}; }
  void validate() const;
};

/// Totals are generated in chunks of this many, chunk c drawing from
/// stream.substream(c), so the output does not depend on the thread count.
inline constexpr std::size_t kTotalsChunk = 4096;

/// m realisations of the sum of Poisson(lambda) iid claims from `spec`.
/// `threads` = 0 uses default_thread_count().
std::vector<double> simulate_totals(const PortfolioSpec& portfolio, const FamilySpec& spec,
                                    std::size_t m, const RngStream& stream, unsigned threads = 1);

/// The ceil((1 - epsilon) m)-th smallest total.
double reserve(std::vector<double> totals, double epsilon);

/// reserve() at several levels from one copy of the totals.
std::vector<double> reserves(std::vector<double> totals, const std::vector<double>& epsilons);

struct ReserveEstimate {
  double epsilon = 0.0;
  std::size_t m = 0;
  double q_star = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  bool totals_retained = false;
  std::optional<std::vector<double>> totals;
};

ReserveEstimate reserve_from_model(const PortfolioSpec& portfolio, const FamilySpec& spec,
                                   double epsilon, std::size_t m, const RngStream& stream,
                                   bool keep_totals = false, unsigned threads = 1);

/// Splits the error of a Monte Carlo reserve from a fitted model:
/// monte_carlo = q*(fitted) - q(fitted), estimation = q(fitted) - q(pseudo-true),
/// model = q(pseudo-true) - q(true). The three add up to q*(fitted) - q(true).
struct ErrorDecomposition {
  double monte_carlo;
  double estimation;
  double model;
};

ErrorDecomposition error_decomposition(double q_star_fitted, double q_fitted_exact,
                                       double q_pseudo_true, double q_true);

/// POWERBURR_THREADS if set to a positive integer, otherwise the hardware count.
unsigned default_thread_count();

}  // namespace powerburr
