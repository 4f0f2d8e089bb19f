#include "powerburr/risk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "powerburr/errors.hpp"
#include "powerburr/sampling.hpp"

namespace powerburr {

void PortfolioSpec::validate() const {
  if (!(J > 0.0) || !(mu > 0.0) || !(T > 0.0) || !std::isfinite(lambda())) {
    throw DomainError("portfolio needs J, mu, T > 0");
  }
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("POWERBURR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> simulate_totals(const PortfolioSpec& portfolio, const FamilySpec& spec,
                                    std::size_t m, const RngStream& stream, unsigned threads) {
  portfolio.validate();
  if (m == 0) throw DomainError("simulate_totals: m must be >= 1");
  const double lambda = portfolio.lambda();
  std::vector<double> totals(m);
  const std::size_t chunks = (m + kTotalsChunk - 1) / kTotalsChunk;
  const FamilySampler sampler(spec);

  auto run_chunk = [&](std::size_t c) {
    RngStream s = stream.substream(c);
    const std::size_t end = std::min(m, (c + 1) * kTotalsChunk);
    for (std::size_t i = c * kTotalsChunk; i < end; ++i) {
      const std::uint64_t count = draw_poisson(s, lambda);
      double total = 0.0;
      for (std::uint64_t j = 0; j < count; ++j) total += sampler(s);
      totals[i] = total;
    }
  };

  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return totals;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c; (c = next.fetch_add(1)) < chunks;) run_chunk(c);
    });
  }
  for (auto& th : pool) th.join();
  return totals;
}

namespace {

std::size_t reserve_rank(std::size_t m, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  // the small offset keeps exact products like 0.95 * 100 from rounding up
  const double r = std::ceil((1.0 - epsilon) * static_cast<double>(m) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, m);
}

}  // namespace

double reserve(std::vector<double> totals, double epsilon) {
  if (totals.empty()) throw EmptySample("reserve: no totals");
  const std::size_t k = reserve_rank(totals.size(), epsilon) - 1;
  std::nth_element(totals.begin(), totals.begin() + static_cast<std::ptrdiff_t>(k), totals.end());
  return totals[k];
}

std::vector<double> reserves(std::vector<double> totals, const std::vector<double>& epsilons) {
  if (totals.empty()) throw EmptySample("reserve: no totals");
  std::sort(totals.begin(), totals.end());
  std::vector<double> out;
  out.reserve(epsilons.size());
  for (double e : epsilons) out.push_back(totals[reserve_rank(totals.size(), e) - 1]);
  return out;
}

ReserveEstimate reserve_from_model(const PortfolioSpec& portfolio, const FamilySpec& spec,
                                   double epsilon, std::size_t m, const RngStream& stream,
                                   bool keep_totals, unsigned threads) {
  auto totals = simulate_totals(portfolio, spec, m, stream, threads);
  ReserveEstimate r;
  r.epsilon = epsilon;
  r.m = m;
  r.q_star = reserve(totals, epsilon);
  r.master_seed = stream.master_seed();
  r.stream_id = stream.stream_id();
  r.totals_retained = keep_totals;
  if (keep_totals) r.totals = std::move(totals);
  return r;
}

ErrorDecomposition error_decomposition(double q_star_fitted, double q_fitted_exact,
                                       double q_pseudo_true, double q_true) {
  return {q_star_fitted - q_fitted_exact, q_fitted_exact - q_pseudo_true, q_pseudo_true - q_true};
}

}  // namespace powerburr
