#include "powerburr/study.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "powerburr/errors.hpp"
#include "powerburr/families.hpp"
#include "powerburr/risk.hpp"
#include "powerburr/sampling.hpp"

namespace powerburr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// streams above this are reserved for the true-family reserve baselines
constexpr std::uint64_t kTruthStreams = 1ULL << 63;

std::size_t family_index(FamilyKind k) {
  return static_cast<std::size_t>(std::find(kAllFamilies.begin(), kAllFamilies.end(), k) - kAllFamilies.begin());
}

std::vector<CellKey> cell_layout(const StudyConfig& c) {
  std::vector<CellKey> keys;
  for (FamilyKind f : c.fitted) {
    for (double e : c.epsilons) keys.push_back({f, Target::Quantile, e, 0.0});
    for (double l : c.lambdas)
      for (double e : c.epsilons) keys.push_back({f, Target::Reserve, e, l});
  }
  return keys;
}

// One replication: estimates in cell_layout order, NaN where the fit or the
// estimate failed.
std::vector<double> replicate(const StudyConfig& c, std::size_t k, std::vector<bool>& fit_failed) {
  const RngStream stream(c.master_seed, k);
  RngStream draws = stream.substream(0);
  const FamilySampler truth(c.true_spec);
  std::vector<double> v(c.n);
  for (double& x : v) x = truth(draws);
  const ClaimSample sample(std::move(v), "replication " + std::to_string(k));

  FitCascade cascade(sample, c.fit_options);
  std::vector<double> out;
  fit_failed.assign(c.fitted.size(), false);
  for (std::size_t fi = 0; fi < c.fitted.size(); ++fi) {
    const FamilyKind f = c.fitted[fi];
    const FitResult* r = cascade.try_fit(f);
    fit_failed[fi] = r == nullptr;
    for (double e : c.epsilons) {
      double q = kNaN;
      if (r) {
        try {
          q = quantile(1.0 - e, r->spec);
        } catch (const std::exception&) {
        }
      }
      out.push_back(q);
    }
    for (std::size_t j = 0; j < c.lambdas.size(); ++j) {
      std::vector<double> qs(c.epsilons.size(), kNaN);
      if (r) {
        const RngStream rs = stream.substream(1 + family_index(f) * c.lambdas.size() + j);
        try {
          qs = reserves(simulate_totals(PortfolioSpec::with_lambda(c.lambdas[j]), r->spec, c.m, rs), c.epsilons);
        } catch (const std::exception&) {
        }
      }
      out.insert(out.end(), qs.begin(), qs.end());
    }
  }
  return out;
}

}  // namespace

StudyConfig StudyConfig::desk(const FamilySpec& truth) {
  StudyConfig c;
  c.true_spec = truth;
  c.N = 100;
  c.m = 10'000;
  return c;
}

StudyConfig StudyConfig::full(const FamilySpec& truth) {
  StudyConfig c;
  c.true_spec = truth;
  c.N = 1000;
  c.m = 100'000;
  return c;
}

void StudyConfig::validate() const {
  if (n < 2) throw ConfigError("study: n must be at least 2");
  if (N < 1) throw ConfigError("study: N must be at least 1");
  if (epsilons.empty()) throw ConfigError("study: at least one epsilon is needed");
  for (double e : epsilons)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("study: epsilon must lie in (0, 1)");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("study: lambda must be > 0");
  if (!lambdas.empty() && (m < 1 || truth_m < 1)) throw ConfigError("study: m must be >= 1");
  if (fitted.empty()) throw ConfigError("study: no applied families");
}

const Cell* StudyResult::find(const CellKey& key) const {
  auto it = cells.find(key);
  return it == cells.end() ? nullptr : &it->second;
}

StudyResult run_study(const StudyConfig& config, const StudyProgress& progress) {
  config.validate();
  StudyResult result;
  result.config = config;
  for (double e : config.epsilons) result.true_quantile[e] = quantile(1.0 - e, config.true_spec);
  for (std::size_t j = 0; j < config.lambdas.size(); ++j) {
    const auto totals = simulate_totals(PortfolioSpec::with_lambda(config.lambdas[j]), config.true_spec,
                                        config.truth_m, RngStream(config.master_seed, kTruthStreams + j),
                                        config.threads);
    const auto qs = reserves(totals, config.epsilons);
    for (std::size_t i = 0; i < qs.size(); ++i) result.true_reserve[{config.lambdas[j], config.epsilons[i]}] = qs[i];
  }

  std::vector<std::vector<double>> estimates(config.N);
  std::vector<std::vector<bool>> failed(config.N);
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < config.N;) {
      estimates[k] = replicate(config, k, failed[k]);
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, config.N);
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(config.threads == 0 ? default_thread_count() : config.threads, config.N));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // fold in replication order
  const auto keys = cell_layout(config);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const CellKey& key = keys[i];
    const double truth = key.target == Target::Quantile ? result.true_quantile.at(key.epsilon)
                                                        : result.true_reserve.at({key.lambda, key.epsilon});
    Cell cell;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < config.N; ++k) {
      const double err = estimates[k][i] - truth;
      if (!std::isfinite(err)) {
        ++cell.failures;
        continue;
      }
      ++cell.successes;
      sum += err;
      sum_sq += err * err;
    }
    if (cell.successes > 0) {
      cell.bias = sum / static_cast<double>(cell.successes);
      cell.rmse = std::sqrt(sum_sq / static_cast<double>(cell.successes));
    }
    result.cells[key] = cell;
  }
  for (std::size_t fi = 0; fi < config.fitted.size(); ++fi) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < config.N; ++k) count += failed[k][fi];
    result.fit_failures[config.fitted[fi]] = count;
  }
  return result;
}

namespace {

std::string format_value(double v, TableFormat format) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format == TableFormat::Csv ? "%.6f" : "%.3f", v);
  // no negative zero in the output
  if (std::string_view(buf).find_first_not_of("-0.") == std::string_view::npos && buf[0] == '-') {
    return buf + 1;
  }
  return buf;
}

std::string format_number(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string emit_table(const std::vector<StudyResult>& columns, const TableSelector& selector,
                       TableFormat format) {
  std::vector<const StudyResult*> order;
  for (const auto& r : columns) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const StudyResult* a, const StudyResult* b) {
    return family_index(a->config.true_spec.kind()) < family_index(b->config.true_spec.kind());
  });
  const double lambda = selector.target == Target::Quantile ? 0.0 : selector.lambda;

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"block", "A\\T"};
  for (const auto* r : order) header.emplace_back(short_label(r->config.true_spec.kind()));
  rows.push_back(header);
  for (const char* block : {"bias", "rmse"}) {
    for (FamilyKind f : kAllFamilies) {
      std::vector<std::string> row{block, std::string(short_label(f))};
      for (const auto* r : order) {
        const Cell* c = r->find({f, selector.target, selector.epsilon, lambda});
        if (!c || c->successes == 0) {
          row.emplace_back("NA");
        } else {
          row.push_back(format_value(block[0] == 'b' ? c->bias : c->rmse, format));
        }
      }
      rows.push_back(std::move(row));
    }
  }

  std::string out;
  if (format == TableFormat::Csv) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
      out += '\n';
    }
    return out;
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string last_block;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r > 0 && row[0] != last_block) {
      out += (r > 1 ? "\n" : "") + row[0] + "\n";
      last_block = row[0];
    }
    std::string line;
    for (std::size_t i = 1; i < row.size(); ++i) {
      const std::string& cell = row[i];
      const std::string pad(width[i] - cell.size(), ' ');
      line += i == 1 ? cell + pad : "  " + pad + cell;
    }
    out += line + "\n";
  }
  return out;
}

std::string emit_cells_csv(const StudyResult& result) {
  std::string out = "true,applied,target,epsilon,lambda,truth,bias,rmse,successes,failures\n";
  for (const auto& [key, cell] : result.cells) {
    const double truth = key.target == Target::Quantile ? result.true_quantile.at(key.epsilon)
                                                        : result.true_reserve.at({key.lambda, key.epsilon});
    out += std::string(identifier(result.config.true_spec.kind())) + "," + std::string(identifier(key.fitted)) + "," +
           (key.target == Target::Quantile ? "quantile" : "reserve") + "," + format_number(key.epsilon) + "," +
           format_number(key.lambda) + "," + format_number(truth) + "," +
           (cell.successes ? format_number(cell.bias) : "NA") + "," +
           (cell.successes ? format_number(cell.rmse) : "NA") + "," + std::to_string(cell.successes) + "," +
           std::to_string(cell.failures) + "\n";
  }
  return out;
}

}  // namespace powerburr
