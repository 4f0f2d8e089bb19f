#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "powerburr/errors.hpp"
#include "powerburr/params.hpp"

using namespace powerburr;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// a fresh scratch directory per test case
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("powerburr_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string synthetic(const fs::path& dir, const std::string& model, int n, int seed) {
  const Run r = run({"sample", "--model", model, "--n", std::to_string(n), "--seed", std::to_string(seed)});
  REQUIRE(r.code == 0);
  return write(dir / "claims.csv", r.out);
}

}  // namespace

TEST_CASE("ingest reads the chosen column and reports bad rows by line") {
  const auto dir = scratch("ingest");
  const auto semi = write(dir / "semi.csv", "id;amount\n1;5.5\n\n2;7\n3;12\n");
  cli::IngestOptions o;
  o.delimiter = ';';
  o.column = "amount";
  auto s = cli::ingest(semi, o);
  CHECK(s.size() == 3);
  CHECK(s.values()[0] == 5.5);
  CHECK(s.source() == semi);
  o.column = "2";
  CHECK(cli::ingest(semi, o).size() == 3);
  o.deductible = 5.0;
  s = cli::ingest(semi, o);
  CHECK(s.deductible_subtracted());
  CHECK(s.values()[0] == doctest::Approx(0.5));
  CHECK(s.values()[2] == doctest::Approx(7.0));

  const auto zero = write(dir / "zero.csv", "claim\n3\n0\n4\n");
  try {
    cli::ingest(zero, {});
    FAIL("zero claim accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  const auto text = write(dir / "text.csv", "claim\n3\nabc\n");
  try {
    cli::ingest(text, {});
    FAIL("text accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  o.deductible = 6.0;
  try {
    cli::ingest(semi, o);
    FAIL("claim below the deductible accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(cli::ingest(write(dir / "empty.csv", "claim\n"), {}), EmptySample);
  o = {};
  o.column = "missing";
  CHECK_THROWS_AS(cli::ingest(semi, o), ParseError);
}

TEST_CASE("sample is reproducible under its seed") {
  const Run a = run({"sample", "--model", "pareto:3,2", "--n", "50", "--seed", "4"});
  const Run b = run({"sample", "--model", "pareto:3,2", "--n", "50", "--seed", "4"});
  const Run c = run({"sample", "--model", "pareto:3,2", "--n", "50", "--seed", "5"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 51);
}

TEST_CASE("fit reports all ten families in table order and is byte-identical") {
  const auto dir = scratch("fit");
  const auto data = synthetic(dir, "lognormal:-0.5,1", 800, 2);
  const Run a = run({"fit", "--data", data, "--seed", "9"});
  const Run b = run({"fit", "--data", data, "--seed", "9"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.err.find("read 800 claims") != std::string::npos);
  const Json r = Json::parse(a.out);
  REQUIRE(r["fits"].size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r["fits"][i]["family"] == identifier(kAllFamilies[i]));
  CHECK(r["ranking"].size() == 10);
  CHECK(r["sample"]["n"] == 800);
  // the richest family is never beaten by a nested one
  double best = -1e300;
  for (const auto& f : r["fits"]) best = std::max(best, f["loglik"].get<double>());
  CHECK(r["fits"][9]["loglik"].get<double>() >= best - 1e-6 * 800);
}

TEST_CASE("fit with custom starts for one family") {
  const auto dir = scratch("starts");
  const auto data = synthetic(dir, "gamma", 500, 3);
  const Run r = run({"fit", "--data", data, "--family", "sixparam", "--start", "2,3,1,1,1,1", "--start", "5,2,1,1,1,1"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  REQUIRE(j["fits"].size() == 1);
  CHECK(j["fits"][0]["starts"].size() == 2);
  CHECK(j["config"]["starts"].size() == 2);
  CHECK(run({"fit", "--data", data, "--family", "gamma", "--family", "weibull", "--start", "1,2"}).code == cli::kConfigError);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  CHECK(run({"fit", "--data", write(dir / "bad.csv", "claim\n1\n-2\n")}).code == cli::kParseError);
  CHECK(run({"fit", "--data", (dir / "absent.csv").string()}).code == cli::kParseError);
  CHECK(run({"fit", "--data", write(dir / "const.csv", "claim\n1\n1\n1\n"), "--family", "lognormal"}).code ==
        cli::kFitFailure);
  CHECK(run({"fit", "--bogus"}).code == cli::kConfigError);
  CHECK(run({"fit", "--data", write(dir / "ok.csv", "claim\n1\n2\n"), "--family", "cauchy"}).code == cli::kConfigError);
  CHECK(run({"study", "--profile", "huge"}).code == cli::kConfigError);
  CHECK(run({"reserve", "--model", "gamma:1,2", "--epsilon", "1.5"}).code == cli::kConfigError);
  CHECK(run({}).code == cli::kConfigError);
}

TEST_CASE("reserve from an explicit model") {
  const Run a = run({"reserve", "--model", "gamma:1,2", "--lambda", "10", "--m", "20000", "--seed", "3", "--per-thousand"});
  const Run b = run({"reserve", "--model", "gamma:1,2", "--lambda", "10", "--m", "20000", "--seed", "3", "--per-thousand",
                     "--threads", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const Json r = Json::parse(a.out);
  REQUIRE(r["reserves"].size() == 2);
  const auto& r95 = r["reserves"][0];
  CHECK(r95["epsilon"] == 0.05);
  CHECK(r95["m"] == 20000);
  CHECK(r95["reserve_per_thousand"].get<double>() == doctest::Approx(r95["reserve"].get<double>() / 1000));
  CHECK(r["reserves"][1]["reserve"].get<double>() > r95["reserve"].get<double>());
  // data and model together are ambiguous
  CHECK(run({"reserve", "--model", "gamma:1,2", "--data", "x.csv"}).code == cli::kConfigError);
}

TEST_CASE("reserve from data with bootstrap intervals") {
  const auto dir = scratch("reserve");
  const auto data = synthetic(dir, "gamma", 400, 8);
  const Run r = run({"reserve", "--data", data, "--family", "gamma", "--lambda", "10", "--m", "2000", "--bootstrap",
                     "100", "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const Json j = Json::parse(slurp(dir / "out" / "report.json"));
  const auto& ci = j["reserves"][0]["reserve_ci"];
  CHECK(ci["lower"].get<double>() < j["reserves"][0]["reserve"].get<double>());
  CHECK(ci["upper"].get<double>() > j["reserves"][0]["reserve"].get<double>());
  CHECK(ci["m_b"] == 100);
  CHECK(fs::exists(dir / "out" / "reserves.csv"));
  CHECK(fs::exists(dir / "out" / "fits.csv"));
}

TEST_CASE("backtest from counts, thresholds and a model") {
  const Run r = run({"backtest", "--observations", "6446", "--exceedances", "314", "--exceedances", "64"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  REQUIRE(j["backtests"].size() == 2);
  CHECK(std::fabs(j["backtests"][0]["p_value"].get<double>() - 0.668) < 0.02);
  CHECK(j["backtests"][1]["p_value"].get<double>() >= 0.99);

  const auto dir = scratch("backtest");
  write(dir / "cfg.json", R"({"epsilons": []})");
  CHECK(run({"backtest", "--observations", "10", "--exceedances", "1", "--config", (dir / "cfg.json").string()}).code ==
        cli::kConfigError);

  const auto data = synthetic(dir, "lognormal:-0.5,1", 1000, 6);
  const Run m = run({"backtest", "--data", data, "--model", "lognormal:-0.5,1"});
  REQUIRE(m.code == 0);
  const Json mj = Json::parse(m.out);
  CHECK(mj["backtests"].size() == 2);
  CHECK(mj["backtests"][0]["expected"] == 50.0);
  const Run t = run({"backtest", "--data", data, "--epsilon", "0.05", "--threshold", "1e9"});
  CHECK(Json::parse(t.out)["backtests"][0]["exceedances"] == 0);
}

TEST_CASE("config file overrides flags, flags override defaults") {
  const auto dir = scratch("precedence");
  write(dir / "cfg.json", R"({"m": 500, "lambdas": [5]})");
  const Run r = run({"reserve", "--model", "gamma:1,2", "--m", "700", "--seed", "12", "--config", (dir / "cfg.json").string()});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["config"]["m"] == 500);
  CHECK(j["config"]["seed"] == 12);
  CHECK(j["config"]["lambdas"] == Json::array({5.0}));
  CHECK(j["config"]["profile"] == "desk");
  // the profile supplies m only when nothing else does
  CHECK(Json::parse(run({"reserve", "--model", "gamma:1,2", "--lambda", "1", "--profile", "full", "--epsilon", "0.05"}).out)["config"]["m"] ==
        100000);
  write(dir / "bad.json", R"({"colour": "red"})");
  CHECK(run({"reserve", "--model", "gamma:1,2", "--config", (dir / "bad.json").string()}).code == cli::kConfigError);
}

TEST_CASE("study output is identical at 1 and 8 threads and re-runs from its report") {
  const auto dir = scratch("study");
  write(dir / "cfg.json",
        R"({"n": [200], "N": 4, "m": 1000, "truth_m": 10000, "lambdas": [10], "families": ["gamma", "weibull", "extpareto"]})");
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(run({"study", "--config", cfg, "--threads", "1", "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"study", "--config", cfg, "--threads", "8", "--out", (dir / "b").string()}).code == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
  }
  CHECK(files == 10);
  REQUIRE(run({"study", "--config", (dir / "a" / "report.json").string(), "--out", (dir / "c").string()}).code == 0);
  CHECK(slurp(dir / "a" / "cells.csv") == slurp(dir / "c" / "cells.csv"));
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "c" / "report.json"));
  const std::string table = slurp(dir / "a" / "quantile_eps0.05_n200.csv");
  CHECK(table.rfind("block,A\\T,Ga\n", 0) == 0);
}
