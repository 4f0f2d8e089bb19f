#pragma once

// The simulation study: draw from a true family, fit the applied families,
// and aggregate bias and RMSE of their quantile and reserve estimates over
// replications.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "powerburr/fitting.hpp"
#include "powerburr/params.hpp"

namespace powerburr {

enum class Target { Quantile, Reserve };

struct StudyConfig {
  FamilySpec true_spec = study_parameters(FamilyKind::Gamma);
  std::size_t n = 5000;
  std::size_t N = 1000;
  std::vector<double> lambdas{10, 100, 1000};
  std::vector<double> epsilons{0.05, 0.01};
  std::size_t m = 100'000;
  std::size_t truth_m = 1'000'000;  // reserve baseline under the true family
  std::uint64_t master_seed = 1;
  std::vector<FamilyKind> fitted{kAllFamilies.begin(), kAllFamilies.end()};
  unsigned threads = 1;
  FitOptions fit_options;

  /// N = 100, m = 1e4: the routine profile.
  static StudyConfig desk(const FamilySpec& truth);
  /// N = 1000, m = 1e5: the full-scale study.
  static StudyConfig full(const FamilySpec& truth);
  /// Throws ConfigError.
  void validate() const;
};

struct CellKey {
  FamilyKind fitted;
  Target target;
  double epsilon;
  double lambda;  // 0 for quantile cells

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct Cell {
  double bias = 0.0;
  double rmse = 0.0;
  std::size_t successes = 0;
  std::size_t failures = 0;
};

struct StudyResult {
  StudyConfig config;
  std::map<CellKey, Cell> cells;
  std::map<double, double> true_quantile;                      // by epsilon
  std::map<std::pair<double, double>, double> true_reserve;    // by (lambda, epsilon)
  std::map<FamilyKind, std::size_t> fit_failures;

  const Cell* find(const CellKey& key) const;
};

/// Called after each finished replication with (finished, total).
using StudyProgress = std::function<void(std::size_t, std::size_t)>;

/// Replication k draws from RngStream(master_seed, k). Results do not depend
/// on `threads` or on scheduling.
StudyResult run_study(const StudyConfig& config, const StudyProgress& progress = {});

struct TableSelector {
  Target target = Target::Quantile;
  double epsilon = 0.05;
  double lambda = 0.0;
};

enum class TableFormat { Text, Csv };

/// Rows are the applied families in table order, columns the true families of
/// `columns` in table order; the bias block comes first, then RMSE. Missing
/// cells print as NA.
std::string emit_table(const std::vector<StudyResult>& columns, const TableSelector& selector,
                       TableFormat format);

/// Every cell of one result as long-format CSV.
std::string emit_cells_csv(const StudyResult& result);

}  // namespace powerburr
