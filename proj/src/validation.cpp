#include "powerburr/validation.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include "powerburr/errors.hpp"
#include "powerburr/families.hpp"
#include "powerburr/sampling.hpp"

namespace powerburr {

Statistic quantile_statistic(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("quantile statistic: epsilon must lie in (0, 1)");
  return [epsilon](const FamilySpec& spec, const RngStream&) { return quantile(1.0 - epsilon, spec); };
}

Statistic reserve_statistic(const PortfolioSpec& portfolio, double epsilon, std::size_t m) {
  portfolio.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("reserve statistic: epsilon must lie in (0, 1)");
  if (m < 1) throw DomainError("reserve statistic: m must be >= 1");
  return [portfolio, epsilon, m](const FamilySpec& spec, const RngStream& stream) {
    return reserve(simulate_totals(portfolio, spec, m, stream), epsilon);
  };
}

std::vector<BootstrapReplicates> bootstrap_replicates(const FamilySpec& spec, std::size_t n,
                                                      const MultiStatistic& statistics, std::size_t count,
                                                      std::size_t m_b, const RngStream& stream,
                                                      const FitOptions& options, unsigned threads) {
  if (m_b < 100) throw DomainError("bootstrap: m_b must be at least 100");
  if (n < 2) throw DomainError("bootstrap: sample size must be at least 2");
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  const auto point = statistics(spec, stream.substream(0));
  if (point.size() != count) throw DomainError("bootstrap: statistic returned the wrong number of values");

  const std::vector<double> own(spec.params().begin(), spec.params().end());
  const FamilySampler sampler(spec);
  std::vector<std::vector<double>> values(m_b, std::vector<double>(count, kNaN));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < m_b;) {
      const RngStream rs = stream.substream(b + 1);
      RngStream draws = rs.substream(0);
      std::vector<double> z(n);
      for (double& x : z) x = sampler(draws);
      try {
        const ClaimSample sample(std::move(z), "bootstrap");
        // the generating estimate is the natural start; the default cascade is
        // costly for the richer families and only serves as a fallback
        std::optional<FitResult> refit;
        try {
          refit = fit(sample, spec.kind(), StartSet{own}, options);
        } catch (const FitFailure&) {
          refit = fit(sample, spec.kind(), {}, options);
        }
        auto v = statistics(refit->spec, rs.substream(1));
        if (v.size() == count) values[b] = std::move(v);
      } catch (const std::exception&) {
        // counted below
      }
    }
  };
  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? default_thread_count() : threads, m_b));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<BootstrapReplicates> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    out[s].m_b = m_b;
    out[s].point = point[s];
    for (const auto& v : values) {
      if (std::isfinite(v[s])) {
        out[s].values.push_back(v[s]);
      } else {
        ++out[s].failures;
      }
    }
    if (10 * out[s].failures > m_b) {
      throw FitFailure("bootstrap: " + std::to_string(out[s].failures) + " of " + std::to_string(m_b) +
                       " replicates of " + spec.to_string() + " failed (limit 10%)");
    }
  }
  return out;
}

BootstrapReplicates bootstrap_replicates(const FamilySpec& spec, std::size_t n, const Statistic& statistic,
                                         std::size_t m_b, const RngStream& stream, const FitOptions& options,
                                         unsigned threads) {
  const MultiStatistic one = [&](const FamilySpec& s, const RngStream& rs) { return std::vector<double>{statistic(s, rs)}; };
  return std::move(bootstrap_replicates(spec, n, one, 1, m_b, stream, options, threads).front());
}

BootstrapCI percentile_interval(const BootstrapReplicates& replicates, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap: level must lie in (0, 1)");
  if (replicates.values.empty()) throw DomainError("bootstrap: no replicates");
  std::vector<double> v = replicates.values;
  std::sort(v.begin(), v.end());
  auto type7 = [&](double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  BootstrapCI ci;
  ci.point = replicates.point;
  ci.lower = type7(0.5 * (1.0 - level));
  ci.upper = type7(0.5 * (1.0 + level));
  ci.level = level;
  ci.m_b = replicates.m_b;
  ci.failures = replicates.failures;
  return ci;
}

BootstrapCI bootstrap_ci(const FamilySpec& spec, std::size_t n, const Statistic& statistic, double level,
                         std::size_t m_b, const RngStream& stream, const FitOptions& options, unsigned threads) {
  return percentile_interval(bootstrap_replicates(spec, n, statistic, m_b, stream, options, threads), level);
}

double binomial_p_value(std::size_t n, double epsilon, std::size_t k) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("back-test: epsilon must lie in (0, 1)");
  if (k > n) throw DomainError("back-test: more exceedances than observations");
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), epsilon);
  // relative slack so outcomes tied with the observed one are not lost to rounding
  const double threshold = boost::math::pdf(dist, static_cast<double>(k)) * (1.0 + 1e-7);
  double p = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double pj = boost::math::pdf(dist, static_cast<double>(j));
    if (pj <= threshold) p += pj;
  }
  return std::min(1.0, p);
}

BacktestReport binomial_backtest(std::size_t n, double epsilon, std::size_t exceedances) {
  if (n == 0) throw EmptySample("back-test: no observations");
  BacktestReport r;
  r.n = n;
  r.level = epsilon;
  r.exceedances = exceedances;
  r.expected = static_cast<double>(n) * epsilon;
  r.p_value = binomial_p_value(n, epsilon, exceedances);
  return r;
}

BacktestReport binomial_backtest(const ClaimSample& sample, double q, double epsilon) {
  if (!(q > 0.0)) throw DomainError("back-test: threshold must be positive");
  const auto z = sample.values();
  const auto k = static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [q](double x) { return x > q; }));
  BacktestReport r = binomial_backtest(sample.size(), epsilon, k);
  r.threshold = q;
  return r;
}

}  // namespace powerburr
