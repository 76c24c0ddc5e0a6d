#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

struct RunOptions {
  std::string configPath;
  std::string outDir;  // empty picks [output] directory, then "out-<subcommand>"
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

// Runs one experiment: data tables as CSV plus a JSON manifest in the output
// directory.  Throws ConfigError / EngineError / ContractError; the binary
// maps them to exit codes 2 / 3 / 4.
void runExperiment(const std::string& subcommand, const RunOptions& options);

std::vector<std::string> experimentNames();
std::string experimentSummary(const std::string& subcommand);

// subcommand -> library operations it drives, for the coverage check
std::vector<std::pair<std::string, std::vector<std::string>>> experimentCoverage();

}  // namespace spinlab
