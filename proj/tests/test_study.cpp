#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "powerburr/errors.hpp"
#include "powerburr/families.hpp"
#include "powerburr/study.hpp"

using namespace powerburr;

namespace {

StudyConfig small_config(FamilyKind truth, std::vector<FamilyKind> fitted) {
  StudyConfig c = StudyConfig::desk(study_parameters(truth));
  c.n = 300;
  c.N = 8;
  c.m = 2000;
  c.truth_m = 20000;
  c.lambdas = {10};
  c.fitted = std::move(fitted);
  c.master_seed = 11;
  return c;
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, ',');) row.push_back(f);
    rows.push_back(row);
  }
  return rows;
}

// Text rows: the label column is padded to the widest label (labels may hold
// spaces), the value columns follow separated by blanks.
std::vector<std::vector<std::string>> split_text(const std::string& text) {
  std::size_t width = 0;
  for (FamilyKind f : kAllFamilies) width = std::max(width, short_label(f).size());
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.size() <= width) continue;  // block titles and blank lines
    std::string label = line.substr(0, width);
    label.erase(label.find_last_not_of(' ') + 1);
    std::vector<std::string> row{label};
    std::istringstream words(line.substr(width));
    for (std::string w; words >> w;) row.push_back(w);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("profiles and defaults") {
  const StudyConfig def;
  CHECK(def.N == 1000);
  CHECK(def.m == 100000);
  CHECK(def.fitted.size() == 10);
  const auto desk = StudyConfig::desk(study_parameters(FamilyKind::Pareto));
  CHECK(desk.N == 100);
  CHECK(desk.m == 10000);
  CHECK(desk.true_spec.kind() == FamilyKind::Pareto);
  CHECK(StudyConfig::full(desk.true_spec).N == 1000);
}

TEST_CASE("invalid configurations are rejected") {
  auto c = small_config(FamilyKind::Gamma, {FamilyKind::Gamma});
  c.epsilons = {0.0};
  CHECK_THROWS_AS(run_study(c), ConfigError);
  c = small_config(FamilyKind::Gamma, {FamilyKind::Gamma});
  c.N = 0;
  CHECK_THROWS_AS(run_study(c), ConfigError);
  c = small_config(FamilyKind::Gamma, {});
  CHECK_THROWS_AS(run_study(c), ConfigError);
  c = small_config(FamilyKind::Gamma, {FamilyKind::Gamma});
  c.lambdas = {-1};
  CHECK_THROWS_AS(run_study(c), ConfigError);
}

TEST_CASE("a single replication has rmse equal to |bias|") {
  auto c = small_config(FamilyKind::Gamma, {FamilyKind::Gamma, FamilyKind::LogNormal});
  c.N = 1;
  const auto r = run_study(c);
  CHECK(r.cells.size() == 2 * (2 + 2));
  for (const auto& [key, cell] : r.cells) {
    REQUIRE(cell.successes == 1);
    CHECK(cell.rmse == doctest::Approx(std::fabs(cell.bias)).epsilon(1e-12));
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto c = small_config(FamilyKind::Weibull, {FamilyKind::Weibull, FamilyKind::Gamma, FamilyKind::FourParam});
  c.threads = 1;
  const auto a = run_study(c);
  c.threads = 3;
  const auto b = run_study(c);
  CHECK(emit_cells_csv(a) == emit_cells_csv(b));
  std::size_t calls = 0;
  run_study(c, [&](std::size_t done, std::size_t total) {
    ++calls;
    CHECK(done <= total);
  });
  CHECK(calls == c.N);
}

TEST_CASE("the true quantile and reserve baselines") {
  const auto c = small_config(FamilyKind::Gamma, {FamilyKind::Gamma});
  const auto r = run_study(c);
  CHECK(r.true_quantile.at(0.05) == doctest::Approx(quantile(0.95, c.true_spec)));
  // reserve over lambda = 10 unit-mean claims sits above the mean total
  CHECK(r.true_reserve.at({10.0, 0.05}) > 10.0);
  CHECK(r.true_reserve.at({10.0, 0.01}) > r.true_reserve.at({10.0, 0.05}));
}

TEST_CASE("a correctly specified Gamma fit is nearly unbiased") {
  auto c = small_config(FamilyKind::Gamma, {FamilyKind::Gamma});
  c.n = 2000;
  c.N = 60;
  c.lambdas = {};
  c.threads = 0;
  const auto r = run_study(c);
  for (double e : c.epsilons) {
    const Cell* cell = r.find({FamilyKind::Gamma, Target::Quantile, e, 0.0});
    REQUIRE(cell);
    CHECK(cell->failures == 0);
    // the MLE quantile bias is O(1/n); allow three standard errors of the mean
    CHECK(std::fabs(cell->bias) < 3.0 * cell->rmse / std::sqrt(double(c.N)));
    CHECK(cell->rmse < 0.05 * r.true_quantile.at(e));
  }
}

TEST_CASE("table layout, NA cells and text/CSV agreement") {
  const auto g = run_study(small_config(FamilyKind::Gamma, {FamilyKind::Gamma, FamilyKind::Pareto}));
  const auto l = run_study(small_config(FamilyKind::LogNormal, {FamilyKind::Gamma, FamilyKind::LogNormal}));
  const TableSelector sel{Target::Reserve, 0.05, 10};
  // columns follow the table order whatever order the results come in
  const auto csv = split_csv(emit_table({g, l}, sel, TableFormat::Csv));
  const auto text = split_text(emit_table({g, l}, sel, TableFormat::Text));
  REQUIRE(csv.size() == 21);
  CHECK(csv[0] == std::vector<std::string>{"block", "A\\T", "L-N", "Ga"});
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(csv[1 + i][0] == "bias");
    CHECK(csv[11 + i][0] == "rmse");
    CHECK(csv[1 + i][1] == short_label(kAllFamilies[i]));
    CHECK(csv[11 + i][1] == short_label(kAllFamilies[i]));
  }
  auto row_of = [&](FamilyKind f, int block) { return csv[1 + 10 * block + (std::find(kAllFamilies.begin(), kAllFamilies.end(), f) - kAllFamilies.begin())]; };
  CHECK(row_of(FamilyKind::Pareto, 0)[2] == "NA");
  CHECK(row_of(FamilyKind::Pareto, 0)[3] != "NA");
  CHECK(row_of(FamilyKind::LogNormal, 1)[3] == "NA");
  CHECK(row_of(FamilyKind::SixParam, 1)[2] == "NA");
  const Cell* cell = g.find({FamilyKind::Gamma, Target::Reserve, 0.05, 10});
  REQUIRE(cell);
  CHECK(std::stod(row_of(FamilyKind::Gamma, 0)[3]) == doctest::Approx(cell->bias).epsilon(1e-5));

  // text rows carry the same cells at lower precision; drop the header line
  REQUIRE(text.size() == csv.size());
  for (std::size_t r = 1; r < csv.size(); ++r) {
    REQUIRE(text[r].size() == csv[r].size() - 1);
    CHECK(text[r][0] == csv[r][1]);
    for (std::size_t j = 2; j < csv[r].size(); ++j) {
      const std::string& t = text[r][j - 1];
      if (csv[r][j] == "NA") {
        CHECK(t == "NA");
      } else {
        CHECK(std::fabs(std::stod(t) - std::stod(csv[r][j])) <= 5.01e-4);
      }
    }
  }
}
