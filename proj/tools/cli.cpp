#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "powerburr/errors.hpp"
#include "powerburr/families.hpp"
#include "powerburr/fitting.hpp"
#include "powerburr/risk.hpp"
#include "powerburr/sampling.hpp"
#include "powerburr/study.hpp"
#include "powerburr/validation.hpp"

namespace powerburr::cli {

using Json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return fields;
    start = pos + 1;
  }
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// shortest text that reads back to the same double
std::string fmt(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::size_t table_index(FamilyKind k) {
  return static_cast<std::size_t>(std::find(kAllFamilies.begin(), kAllFamilies.end(), k) - kAllFamilies.begin());
}

}  // namespace

ClaimSample ingest(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path, 0);
  if (!(options.deductible >= 0.0) || !std::isfinite(options.deductible))
    throw ConfigError("deductible must be a finite nonnegative number");

  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> column;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, options.delimiter);
    if (!column) {
      // header row
      if (options.column.empty()) {
        column = 0;
      } else if (auto idx = to_double(options.column); idx && *idx >= 1 && *idx == std::floor(*idx)) {
        column = static_cast<std::size_t>(*idx) - 1;
      } else {
        const auto it = std::find(fields.begin(), fields.end(), options.column);
        if (it == fields.end()) throw ParseError(path + ":" + std::to_string(line_no) + ": no column '" + options.column + "' in header", line_no);
        column = static_cast<std::size_t>(it - fields.begin());
      }
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (*column >= fields.size()) throw ParseError(where + "row has no column " + std::to_string(*column + 1), line_no);
    const auto v = to_double(fields[*column]);
    if (!v || !std::isfinite(*v)) throw ParseError(where + "not a number: '" + std::string(fields[*column]) + "'", line_no);
    const double z = *v - options.deductible;
    if (!(z > 0.0)) {
      throw ParseError(where + "claim " + std::string(fields[*column]) +
                           (options.deductible > 0.0 ? " is not above the deductible" : " is not positive"),
                       line_no);
    }
    values.push_back(z);
  }
  if (values.empty()) throw EmptySample(path + ": no claims");
  return ClaimSample(std::move(values), path, options.deductible > 0.0);
}

namespace {

// ---- settings -------------------------------------------------------------

Json defaults_for(const std::string& command) {
  Json d;
  d["seed"] = 1;
  d["threads"] = 0;
  d["profile"] = "desk";
  d["out"] = "";
  d["gradient_tolerance"] = FitOptions{}.gradient_tolerance;
  d["max_iterations"] = FitOptions{}.max_iterations;
  const bool reads_data = command == "fit" || command == "reserve" || command == "backtest";
  if (reads_data) {
    d["data"] = "";
    d["column"] = "";
    d["delimiter"] = ",";
    d["deductible"] = 0.0;
  }
  if (command == "sample") {
    d["model"] = "gamma";
    d["n"] = 1000;
  } else if (command == "fit") {
    d["families"] = Json::array();
    d["starts"] = Json::array();
  } else if (command == "reserve") {
    d["model"] = "";
    d["families"] = Json::array();
    d["lambdas"] = {1000.0};
    d["epsilons"] = {0.05, 0.01};
    d["bootstrap"] = 0;
    d["level"] = 0.95;
    d["per_thousand"] = false;
  } else if (command == "study") {
    d["truths"] = {"gamma"};
    d["n"] = {50, 500, 5000};
    d["families"] = Json::array();
    d["lambdas"] = {10.0, 100.0, 1000.0};
    d["epsilons"] = {0.05, 0.01};
    d["truth_m"] = 1'000'000;
  } else if (command == "backtest") {
    d["model"] = "";
    d["families"] = Json::array();
    d["epsilons"] = {0.05, 0.01};
    d["thresholds"] = Json::array();
    d["observations"] = 0;
    d["exceedances"] = Json::array();
  }
  return d;
}

// m and N follow the profile unless set explicitly
void fill_profile(const std::string& command, Json& c) {
  const std::string profile = c.at("profile").get<std::string>();
  if (profile != "desk" && profile != "full") throw ConfigError("profile must be desk or full, not '" + profile + "'");
  const bool full = profile == "full";
  if ((command == "reserve" || command == "study") && !c.contains("m")) c["m"] = full ? 100'000 : 10'000;
  if (command == "study" && !c.contains("N")) c["N"] = full ? 1000 : 100;
}

Json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  // a previous report re-runs from its embedded config
  if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
  return j;
}

Json resolve(const std::string& command, const Json& flags, const std::string& config_path) {
  Json c = defaults_for(command);
  std::set<std::string> known;
  for (const auto& [k, v] : c.items()) known.insert(k);
  known.insert({"m", "N"});
  auto overlay = [&](const Json& layer, const std::string& origin) {
    for (const auto& [k, v] : layer.items()) {
      if (!known.count(k)) throw ConfigError(origin + ": '" + k + "' is not a setting of " + command);
      c[k] = v;
    }
  };
  overlay(flags, "flags");
  if (!config_path.empty()) overlay(read_config_file(config_path), config_path);
  fill_profile(command, c);
  return c;
}

template <class T>
T get(const Json& c, const char* key) {
  try {
    return c.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("setting '") + key + "' has the wrong type");
  }
}

std::vector<double> probabilities(const Json& c) {
  const auto eps = get<std::vector<double>>(c, "epsilons");
  if (eps.empty()) throw ConfigError("at least one epsilon is required");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilon " + fmt(e) + " is outside (0, 1)");
  return eps;
}

std::vector<FamilyKind> families(const Json& c, bool all_if_empty = true) {
  std::vector<FamilyKind> out;
  for (const auto& name : get<std::vector<std::string>>(c, "families")) {
    try {
      const FamilyKind k = parse_family(name);
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    } catch (const UnsupportedKind& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty() && all_if_empty) out.assign(kAllFamilies.begin(), kAllFamilies.end());
  std::sort(out.begin(), out.end(), [](FamilyKind a, FamilyKind b) { return table_index(a) < table_index(b); });
  return out;
}

FamilySpec model(const Json& c) {
  const auto text = get<std::string>(c, "model");
  try {
    if (text.find(':') == std::string::npos) return study_parameters(parse_family(text));
    return parse_family_spec(text);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("model '" + text + "': " + e.what());
  }
}

unsigned threads(const Json& c) {
  const auto t = get<long long>(c, "threads");
  if (t < 0) throw ConfigError("threads must be >= 0");
  return t == 0 ? default_thread_count() : static_cast<unsigned>(t);
}

FitOptions fit_options(const Json& c) {
  FitOptions o;
  o.gradient_tolerance = get<double>(c, "gradient_tolerance");
  o.max_iterations = get<int>(c, "max_iterations");
  if (!(o.gradient_tolerance > 0.0) || o.max_iterations < 1) throw ConfigError("invalid optimizer settings");
  return o;
}

std::size_t count(const Json& c, const char* key, long long minimum = 0) {
  const auto v = get<long long>(c, key);
  if (v < minimum) throw ConfigError(std::string(key) + " must be >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

std::size_t positive_count(const Json& c, const char* key) { return count(c, key, 1); }

std::vector<std::size_t> counts(const Json& c, const char* key) {
  std::vector<std::size_t> out;
  for (long long v : get<std::vector<long long>>(c, key)) {
    if (v < 0) throw ConfigError(std::string(key) + " must be nonnegative");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

ClaimSample load_data(const Json& c, std::ostream& err) {
  IngestOptions o;
  o.column = get<std::string>(c, "column");
  std::string d = get<std::string>(c, "delimiter");
  if (d == "tab" || d == "\\t") d = "\t";
  if (d.size() != 1) throw ConfigError("delimiter must be a single character");
  o.delimiter = d[0];
  o.deductible = get<double>(c, "deductible");
  ClaimSample s = ingest(get<std::string>(c, "data"), o);
  err << "read " << s.size() << " claims from " << s.source() << ": mean " << fmt(s.mean()) << ", sd "
      << fmt(s.sd()) << ", max " << fmt(s.max()) << "\n";
  return s;
}

Json sample_json(const ClaimSample& s) {
  return Json{{"source", s.source()},  {"n", s.size()},   {"mean", s.mean()},
              {"sd", s.sd()},          {"max", s.max()},  {"deductible_subtracted", s.deductible_subtracted()}};
}

// ---- output ---------------------------------------------------------------

// The settings that determine the numbers; where output goes and how many
// threads ran do not, so a report re-runs anywhere to the same results.
Json reproducible(Json c) {
  c.erase("out");
  c.erase("threads");
  return c;
}

struct Output {
  Json report;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
};

void write_output(const Json& c, const Output& o, std::ostream& out) {
  const auto dir = get<std::string>(c, "out");
  const std::string text = o.report.dump(2) + "\n";
  if (dir.empty()) {
    out << text;
    return;
  }
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + dir + "/" + name);
    f << content;
  };
  write("report.json", text);
  for (const auto& [name, content] : o.files) write(name, content);
}

// ---- fitting --------------------------------------------------------------

struct FitRow {
  FamilyKind kind;
  std::optional<FitResult> result;
  std::string error;
};

std::vector<FitRow> fit_families(const ClaimSample& sample, const std::vector<FamilyKind>& kinds,
                                 const StartSet& custom, const FitOptions& options) {
  FitCascade cascade(sample, options);
  std::vector<FitRow> rows;
  for (FamilyKind k : kinds) {
    FitRow row{k, std::nullopt, {}};
    try {
      row.result = custom.empty() ? cascade.fit(k) : fit(sample, k, custom, options);
    } catch (const FitFailure& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json fit_json(const FitRow& row) {
  Json j{{"family", identifier(row.kind)}, {"label", short_label(row.kind)}};
  if (!row.result) {
    j["status"] = "failed";
    j["error"] = row.error;
    return j;
  }
  const FitResult& r = *row.result;
  j["status"] = "ok";
  j["params"] = std::vector<double>(r.spec.params().begin(), r.spec.params().end());
  j["loglik"] = r.loglik;
  j["converged"] = r.converged;
  j["start_index"] = r.start_index;
  j["iterations"] = r.iterations;
  Json starts = Json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"start", s.start}, {"loglik", s.loglik}, {"converged", s.converged}, {"message", s.message}});
  }
  j["starts"] = starts;
  return j;
}

std::string fits_csv(const std::vector<FitRow>& rows) {
  std::string s = "family,label,status,loglik,converged,iterations,params\n";
  for (const auto& row : rows) {
    s += std::string(identifier(row.kind)) + ",\"" + std::string(short_label(row.kind)) + "\",";
    if (!row.result) {
      s += "failed,NA,NA,NA,NA\n";
      continue;
    }
    std::string params;
    for (double p : row.result->spec.params()) params += (params.empty() ? "" : ";") + fmt(p);
    s += "ok," + fmt(row.result->loglik) + "," + (row.result->converged ? "true" : "false") + "," +
         std::to_string(row.result->iterations) + "," + params + "\n";
  }
  return s;
}

Json ranking(const std::vector<FitRow>& rows) {
  std::vector<const FitRow*> ok;
  for (const auto& r : rows)
    if (r.result) ok.push_back(&r);
  std::stable_sort(ok.begin(), ok.end(), [](const FitRow* a, const FitRow* b) { return a->result->loglik > b->result->loglik; });
  Json j = Json::array();
  for (const auto* r : ok) j.push_back(identifier(r->kind));
  return j;
}

void require_some_fit(const std::vector<FitRow>& rows) {
  if (std::none_of(rows.begin(), rows.end(), [](const FitRow& r) { return r.result.has_value(); })) {
    std::string msg = "no family could be fitted";
    for (const auto& r : rows) msg += "\n  " + std::string(identifier(r.kind)) + ": " + r.error;
    throw FitFailure(msg);
  }
}

// ---- commands -------------------------------------------------------------

Output cmd_sample(const Json& c) {
  const FamilySpec spec = model(c);
  const std::size_t n = positive_count(c, "n");
  RngStream rs(get<std::uint64_t>(c, "seed"), 0);
  const FamilySampler sampler(spec);
  std::string csv = "claim\n";
  for (std::size_t i = 0; i < n; ++i) csv += fmt(sampler(rs)) + "\n";
  Output o;
  o.report = {{"command", "sample"}, {"config", reproducible(c)}, {"model", spec.to_string()}, {"n", n}};
  o.files.emplace_back("claims.csv", csv);
  return o;
}

Output cmd_fit(const Json& c, std::ostream& err) {
  const ClaimSample sample = load_data(c, err);
  const auto kinds = families(c);
  const auto starts = get<StartSet>(c, "starts");
  if (!starts.empty() && kinds.size() != 1) throw ConfigError("custom starts need exactly one family");
  const auto rows = fit_families(sample, kinds, starts, fit_options(c));
  require_some_fit(rows);
  Output o;
  o.report = {{"command", "fit"}, {"config", reproducible(c)}, {"sample", sample_json(sample)}};
  Json fits = Json::array();
  for (const auto& r : rows) fits.push_back(fit_json(r));
  o.report["fits"] = fits;
  o.report["ranking"] = ranking(rows);
  o.files.emplace_back("fits.csv", fits_csv(rows));
  return o;
}

Output cmd_reserve(const Json& c, std::ostream& err) {
  const auto eps = probabilities(c);
  const auto lambdas = get<std::vector<double>>(c, "lambdas");
  if (lambdas.empty()) throw ConfigError("at least one lambda is required");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda must be positive");
  const std::size_t m = positive_count(c, "m");
  const auto seed = get<std::uint64_t>(c, "seed");
  const unsigned t = threads(c);
  const auto m_b = count(c, "bootstrap");
  const double level = get<double>(c, "level");
  const bool per_thousand = get<bool>(c, "per_thousand");
  if (m_b != 0 && m_b < 100) throw ConfigError("bootstrap needs at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");

  Output o;
  o.report = {{"command", "reserve"}, {"config", reproducible(c)}};
  std::vector<std::pair<FamilySpec, std::size_t>> models;  // spec, sample size for the bootstrap
  const bool have_data = !get<std::string>(c, "data").empty();
  const bool have_model = !get<std::string>(c, "model").empty();
  if (have_data == have_model) throw ConfigError("reserve needs exactly one of data or model");
  if (have_data) {
    const ClaimSample sample = load_data(c, err);
    const auto rows = fit_families(sample, families(c), {}, fit_options(c));
    require_some_fit(rows);
    o.report["sample"] = sample_json(sample);
    Json fits = Json::array();
    for (const auto& r : rows) {
      fits.push_back(fit_json(r));
      if (r.result) models.emplace_back(r.result->spec, sample.size());
    }
    o.report["fits"] = fits;
    o.files.emplace_back("fits.csv", fits_csv(rows));
  } else {
    if (m_b != 0) throw ConfigError("bootstrap intervals need data to fix the sample size");
    models.emplace_back(model(c), 0);
  }

  std::string csv = "family,label,lambda,epsilon,m,quantile,reserve";
  if (per_thousand) csv += ",reserve_per_thousand";
  if (m_b) csv += ",quantile_lower,quantile_upper,reserve_lower,reserve_upper";
  csv += "\n";
  auto ci_json = [](const BootstrapCI& ci) {
    return Json{{"lower", ci.lower}, {"upper", ci.upper}, {"level", ci.level}, {"m_b", ci.m_b}, {"failures", ci.failures}};
  };
  Json out = Json::array();
  for (const auto& [spec, n] : models) {
    const std::size_t fi = table_index(spec.kind());
    // bootstrap statistics: the quantiles for each epsilon, then the reserves
    // for each (lambda, epsilon), all from one refit per replicate
    std::vector<BootstrapReplicates> boot;
    if (m_b) {
      const MultiStatistic stats = [&](const FamilySpec& s, const RngStream& rs) {
        std::vector<double> v;
        for (double e : eps) v.push_back(quantile(1.0 - e, s));
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
          const auto r = reserves(simulate_totals(PortfolioSpec::with_lambda(lambdas[j]), s, m, rs.substream(j)), eps);
          v.insert(v.end(), r.begin(), r.end());
        }
        return v;
      };
      boot = bootstrap_replicates(spec, n, stats, eps.size() * (1 + lambdas.size()), m_b, RngStream(seed, 1000 + fi),
                                  fit_options(c), t);
    }
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      const auto portfolio = PortfolioSpec::with_lambda(lambdas[j]);
      const RngStream stream = RngStream(seed, fi).substream(j);
      const auto qs = reserves(simulate_totals(portfolio, spec, m, stream, t), eps);
      for (std::size_t e = 0; e < eps.size(); ++e) {
        const double qz = quantile(1.0 - eps[e], spec);
        Json r{{"family", identifier(spec.kind())},
               {"label", short_label(spec.kind())},
               {"params", std::vector<double>(spec.params().begin(), spec.params().end())},
               {"lambda", lambdas[j]},
               {"epsilon", eps[e]},
               {"m", m},
               {"quantile", qz},
               {"reserve", qs[e]},
               {"master_seed", seed},
               {"stream_id", fi},
               {"substream", j}};
        if (per_thousand) r["reserve_per_thousand"] = qs[e] / 1000.0;
        csv += std::string(identifier(spec.kind())) + ",\"" + std::string(short_label(spec.kind())) + "\"," +
               fmt(lambdas[j]) + "," + fmt(eps[e]) + "," + std::to_string(m) + "," + fmt(qz) + "," + fmt(qs[e]);
        if (per_thousand) csv += "," + fmt(qs[e] / 1000.0);
        if (m_b) {
          const auto qci = percentile_interval(boot[e], level);
          const auto rci = percentile_interval(boot[eps.size() * (1 + j) + e], level);
          r["quantile_ci"] = ci_json(qci);
          r["reserve_ci"] = ci_json(rci);
          csv += "," + fmt(qci.lower) + "," + fmt(qci.upper) + "," + fmt(rci.lower) + "," + fmt(rci.upper);
        }
        csv += "\n";
        out.push_back(r);
      }
    }
  }
  o.report["reserves"] = out;
  o.files.emplace_back("reserves.csv", csv);
  return o;
}

Output cmd_study(const Json& c, std::ostream& err) {
  std::vector<FamilyKind> truths;
  for (const auto& name : get<std::vector<std::string>>(c, "truths")) {
    try {
      truths.push_back(parse_family(name));
    } catch (const UnsupportedKind& e) {
      throw ConfigError(e.what());
    }
  }
  if (truths.empty()) throw ConfigError("at least one true family is required");
  const auto sizes = counts(c, "n");
  if (sizes.empty()) throw ConfigError("at least one sample size is required");
  for (std::size_t n : sizes)
    if (n < 2) throw ConfigError("sample sizes must be at least 2");

  StudyConfig base;
  base.N = positive_count(c, "N");
  base.m = positive_count(c, "m");
  base.truth_m = positive_count(c, "truth_m");
  base.lambdas = get<std::vector<double>>(c, "lambdas");
  base.epsilons = probabilities(c);
  base.master_seed = get<std::uint64_t>(c, "seed");
  base.fitted = families(c);
  base.threads = threads(c);
  base.fit_options = fit_options(c);

  Output o;
  o.report = {{"command", "study"}, {"config", reproducible(c)}};
  Json studies = Json::array();
  std::string cells;
  for (std::size_t n : sizes) {
    std::vector<StudyResult> columns;
    for (FamilyKind truth : truths) {
      StudyConfig sc = base;
      sc.true_spec = study_parameters(truth);
      sc.n = n;
      err << "study: " << identifier(truth) << " n=" << n << " N=" << sc.N << "\n";
      columns.push_back(run_study(sc));
      const StudyResult& r = columns.back();
      Json tq = Json::object(), tr = Json::array(), ff = Json::object();
      for (const auto& [e, q] : r.true_quantile) tq[fmt(e)] = q;
      for (const auto& [le, q] : r.true_reserve) tr.push_back({{"lambda", le.first}, {"epsilon", le.second}, {"reserve", q}});
      for (const auto& [k, f] : r.fit_failures) ff[std::string(identifier(k))] = f;
      studies.push_back({{"truth", sc.true_spec.to_string()}, {"n", n}, {"true_quantile", tq},
                         {"true_reserve", tr}, {"fit_failures", ff}});
      std::string csv = emit_cells_csv(r);
      if (!cells.empty()) csv.erase(0, csv.find('\n') + 1);
      cells += csv;
    }
    const std::string suffix = "_n" + std::to_string(n);
    for (double e : base.epsilons) {
      const std::string stem = "quantile_eps" + fmt(e) + suffix;
      const TableSelector sel{Target::Quantile, e, 0.0};
      o.files.emplace_back(stem + ".csv", emit_table(columns, sel, TableFormat::Csv));
      o.files.emplace_back(stem + ".txt", emit_table(columns, sel, TableFormat::Text));
      for (double l : base.lambdas) {
        const std::string rstem = "reserve_lambda" + fmt(l) + "_eps" + fmt(e) + suffix;
        const TableSelector rsel{Target::Reserve, e, l};
        o.files.emplace_back(rstem + ".csv", emit_table(columns, rsel, TableFormat::Csv));
        o.files.emplace_back(rstem + ".txt", emit_table(columns, rsel, TableFormat::Text));
      }
    }
  }
  o.report["studies"] = studies;
  o.files.emplace_back("cells.csv", cells);
  return o;
}

Output cmd_backtest(const Json& c, std::ostream& err) {
  const auto eps = probabilities(c);
  const auto observations = count(c, "observations");
  const auto exceedances = counts(c, "exceedances");
  const auto thresholds = get<std::vector<double>>(c, "thresholds");
  const bool have_data = !get<std::string>(c, "data").empty();
  const bool have_model = !get<std::string>(c, "model").empty();

  Output o;
  o.report = {{"command", "backtest"}, {"config", reproducible(c)}};
  std::string csv = "family,epsilon,threshold,n,exceedances,expected,p_value\n";
  Json tests = Json::array();
  auto add = [&](const std::string& family, const BacktestReport& r) {
    tests.push_back({{"family", family},          {"epsilon", r.level},       {"threshold", r.threshold}, {"n", r.n},
                     {"exceedances", r.exceedances}, {"expected", r.expected}, {"p_value", r.p_value}});
    csv += family + "," + fmt(r.level) + "," + fmt(r.threshold) + "," + std::to_string(r.n) + "," +
           std::to_string(r.exceedances) + "," + fmt(r.expected) + "," + fmt(r.p_value) + "\n";
  };

  if (observations > 0) {
    // counts given directly
    if (have_data) throw ConfigError("give either data or observation counts, not both");
    if (exceedances.size() != eps.size()) throw ConfigError("need one exceedance count per epsilon");
    for (std::size_t e = 0; e < eps.size(); ++e) {
      if (exceedances[e] > observations) throw ConfigError("more exceedances than observations");
      add("", binomial_backtest(observations, eps[e], exceedances[e]));
    }
  } else {
    if (!have_data) throw ConfigError("backtest needs data or observation counts");
    const ClaimSample sample = load_data(c, err);
    o.report["sample"] = sample_json(sample);
    if (!thresholds.empty()) {
      if (thresholds.size() != eps.size()) throw ConfigError("need one threshold per epsilon");
      for (std::size_t e = 0; e < eps.size(); ++e) add("", binomial_backtest(sample, thresholds[e], eps[e]));
    } else if (have_model) {
      const FamilySpec spec = model(c);
      for (double e : eps) add(std::string(identifier(spec.kind())), binomial_backtest(sample, quantile(1.0 - e, spec), e));
    } else {
      const auto rows = fit_families(sample, families(c), {}, fit_options(c));
      require_some_fit(rows);
      Json fits = Json::array();
      for (const auto& r : rows) {
        fits.push_back(fit_json(r));
        if (!r.result) continue;
        for (double e : eps) add(std::string(identifier(r.kind)), binomial_backtest(sample, quantile(1.0 - e, r.result->spec), e));
      }
      o.report["fits"] = fits;
    }
  }
  o.report["backtests"] = tests;
  o.files.emplace_back("backtest.csv", csv);
  return o;
}

// ---- argument parsing -----------------------------------------------------

// Options given on the command line, as settings keys.
class FlagSet {
 public:
  explicit FlagSet(CLI::App* app) : app_(app) {}

  template <class T>
  void add(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(flag, *value, help);
    if constexpr (!std::is_same_v<T, std::string> && requires { value->push_back(typename T::value_type{}); }) {
      opt->take_all()->delimiter(',');
    }
    setters_.push_back([opt, value, key](Json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
  }

  void add_flag(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag(flag, *value, help);
    setters_.push_back([opt, value, key](Json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
  }

  Json collect() const {
    Json j = Json::object();
    for (const auto& s : setters_) s(j);
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(Json&)>> setters_;
};

void common_flags(FlagSet& f) {
  f.add<std::uint64_t>("--seed", "seed", "master seed");
  f.add<long long>("--threads", "threads", "worker threads (0: POWERBURR_THREADS or hardware)");
  f.add<std::string>("--profile", "profile", "desk or full");
  f.add<std::string>("--out", "out", "output directory (default: report to stdout)");
  f.add<double>("--gradient-tolerance", "gradient_tolerance", "optimizer tolerance");
  f.add<int>("--max-iterations", "max_iterations", "optimizer iteration cap");
}

void data_flags(FlagSet& f) {
  f.add<std::string>("--data", "data", "claims file with a header row");
  f.add<std::string>("--column", "column", "column name or 1-based index");
  f.add<std::string>("--delimiter", "delimiter", "field delimiter (',' ';' 'tab')");
  f.add<double>("--deductible", "deductible", "subtracted from every claim");
}

std::vector<double> parse_start(const std::string& text) {
  std::vector<double> v;
  for (auto field : split(text, ',')) {
    const auto d = to_double(field);
    if (!d) throw ConfigError("start '" + text + "' is not a list of numbers");
    v.push_back(*d);
  }
  return v;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PowerBurr claim-severity fitting, reserves and simulation studies"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::unique_ptr<FlagSet>> flags;

  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "JSON settings file; overrides flags");
    auto f = std::make_unique<FlagSet>(s);
    common_flags(*f);
    FlagSet* raw = f.get();
    flags[name] = std::move(f);
    return raw;
  };

  FlagSet* sample = sub("sample", "draw synthetic claims");
  sample->add<std::string>("--model", "model", "family name or kind:p1,p2,...");
  sample->add<long long>("--n", "n", "number of claims");

  FlagSet* fitf = sub("fit", "fit families to claims");
  data_flags(*fitf);
  fitf->add<std::vector<std::string>>("--family", "families", "families to fit (default all)");
  std::vector<std::string> start_texts;
  CLI::Option* start_opt = app.get_subcommand("fit")->add_option("--start", start_texts, "custom start a,b,c,... (repeatable)");

  FlagSet* res = sub("reserve", "Monte Carlo reserves from fitted or given models");
  data_flags(*res);
  res->add<std::string>("--model", "model", "explicit model kind:p1,p2,... instead of data");
  res->add<std::vector<std::string>>("--family", "families", "families to fit (default all)");
  res->add<std::vector<double>>("--lambda", "lambdas", "expected claim count");
  res->add<std::vector<double>>("--epsilon", "epsilons", "reserve levels");
  res->add<long long>("--m", "m", "simulated totals");
  res->add<long long>("--bootstrap", "bootstrap", "bootstrap replicates (0: none)");
  res->add<double>("--level", "level", "bootstrap interval level");
  res->add_flag("--per-thousand", "per_thousand", "also report reserves divided by 1,000");

  FlagSet* st = sub("study", "simulation study of bias and RMSE");
  st->add<std::vector<std::string>>("--truth", "truths", "true families (default gamma)");
  st->add<std::vector<long long>>("--n", "n", "sample sizes");
  st->add<long long>("--N", "N", "replications");
  st->add<long long>("--m", "m", "simulated totals per reserve estimate");
  st->add<long long>("--truth-m", "truth_m", "simulated totals for the true reserve");
  st->add<std::vector<double>>("--lambda", "lambdas", "expected claim counts");
  st->add<std::vector<double>>("--epsilon", "epsilons", "levels");
  st->add<std::vector<std::string>>("--family", "families", "applied families (default all)");

  FlagSet* bt = sub("backtest", "binomial back-test of quantile exceedances");
  data_flags(*bt);
  bt->add<std::string>("--model", "model", "model giving the thresholds");
  bt->add<std::vector<std::string>>("--family", "families", "families to fit for thresholds");
  bt->add<std::vector<double>>("--epsilon", "epsilons", "levels");
  bt->add<std::vector<double>>("--threshold", "thresholds", "explicit thresholds, one per epsilon");
  bt->add<long long>("--observations", "observations", "observation count (with --exceedances)");
  bt->add<std::vector<long long>>("--exceedances", "exceedances", "exceedance counts, one per epsilon");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto started = std::chrono::steady_clock::now();
  try {
    Json flag_json = flags.at(command)->collect();
    if (command == "fit" && start_opt->count() > 0) {
      Json starts = Json::array();
      for (const auto& s : start_texts) starts.push_back(parse_start(s));
      flag_json["starts"] = starts;
    }
    const Json config = resolve(command, flag_json, config_path);
    Output o;
    if (command == "sample") {
      o = cmd_sample(config);
      // the claims themselves go to stdout when there is no output directory
      if (get<std::string>(config, "out").empty()) {
        out << o.files.front().second;
        return kOk;
      }
    } else if (command == "fit") {
      o = cmd_fit(config, err);
    } else if (command == "reserve") {
      o = cmd_reserve(config, err);
    } else if (command == "study") {
      o = cmd_study(config, err);
    } else {
      o = cmd_backtest(config, err);
    }
    write_output(config, o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const EmptySample& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const FitFailure& e) {
    err << "error: " << e.what() << "\n";
    return kFitFailure;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  char took[32];
  std::snprintf(took, sizeof took, "%.2f", elapsed.count());
  err << command << ": " << took << " s\n";
  return kOk;
}

}  // namespace powerburr::cli
