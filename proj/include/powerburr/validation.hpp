#pragma once

// Parametric bootstrap intervals and the binomial back-test of quantile
// calibration.

#include <cstddef>
#include <functional>
#include <vector>

#include "powerburr/fitting.hpp"
#include "powerburr/params.hpp"
#include "powerburr/risk.hpp"
#include "powerburr/rng.hpp"
#include "powerburr/sample.hpp"

namespace powerburr {

/// A functional of a fitted model. The stream feeds statistics that need
/// simulation (reserves); closed-form ones ignore it.
using Statistic = std::function<double(const FamilySpec&, const RngStream&)>;

/// The upper epsilon-quantile of the claim size.
Statistic quantile_statistic(double epsilon);
/// The Monte Carlo reserve at level epsilon from m simulated totals.
Statistic reserve_statistic(const PortfolioSpec& portfolio, double epsilon, std::size_t m);

/// Several functionals evaluated on the same refit.
using MultiStatistic = std::function<std::vector<double>(const FamilySpec&, const RngStream&)>;

struct BootstrapReplicates {
  double point = 0.0;
  std::vector<double> values;  // successful replicates, in replicate order
  std::size_t m_b = 0;
  std::size_t failures = 0;
};

struct BootstrapCI {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t m_b = 0;
  std::size_t failures = 0;
};

/// Draws m_b samples of size n from `spec`, refits the same family to each
/// (starting from `spec`; the default starts only if that fails) and evaluates the
/// statistic. Replicate b uses stream.substream(b + 1); the point estimate
/// uses substream(0). Throws DomainError if m_b < 100 or n < 2, FitFailure
/// if more than 10% of the refits fail.
BootstrapReplicates bootstrap_replicates(const FamilySpec& spec, std::size_t n, const Statistic& statistic,
                                         std::size_t m_b, const RngStream& stream,
                                         const FitOptions& options = {}, unsigned threads = 1);

/// As above for `count` statistics at once: each replicate is refitted once
/// and the failure limit applies to each statistic separately.
std::vector<BootstrapReplicates> bootstrap_replicates(const FamilySpec& spec, std::size_t n,
                                                      const MultiStatistic& statistics, std::size_t count,
                                                      std::size_t m_b, const RngStream& stream,
                                                      const FitOptions& options = {}, unsigned threads = 1);

/// Type-7 percentile interval at `level` over the replicates.
BootstrapCI percentile_interval(const BootstrapReplicates& replicates, double level);

BootstrapCI bootstrap_ci(const FamilySpec& spec, std::size_t n, const Statistic& statistic, double level,
                         std::size_t m_b, const RngStream& stream, const FitOptions& options = {},
                         unsigned threads = 1);

struct BacktestReport {
  std::size_t n = 0;
  double level = 0.0;  // epsilon
  double threshold = 0.0;
  std::size_t exceedances = 0;
  double expected = 0.0;
  double p_value = 1.0;
};

/// Two-sided exact binomial p-value: the total probability of outcomes no
/// more likely than k.
double binomial_p_value(std::size_t n, double epsilon, std::size_t k);

/// Counts z_i > q and tests that the exceedance probability is epsilon.
BacktestReport binomial_backtest(const ClaimSample& sample, double q, double epsilon);
BacktestReport binomial_backtest(std::size_t n, double epsilon, std::size_t exceedances);

}  // namespace powerburr
