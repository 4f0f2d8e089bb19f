#pragma once

// Command-line front end. run_cli is the whole program minus main(), so the
// tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

#include "powerburr/sample.hpp"

namespace powerburr::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // anything unexpected
  kParseError = 2,
  kFitFailure = 3,
  kConfigError = 4,
};

struct IngestOptions {
  std::string column;       // header name or 1-based index; empty = first column
  char delimiter = ',';
  double deductible = 0.0;  // subtracted from every claim
};

/// Reads a delimited file with a header row. Throws ParseError carrying the
/// 1-based line number of a bad row, EmptySample if no claims remain.
ClaimSample ingest(const std::string& path, const IngestOptions& options);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace powerburr::cli
