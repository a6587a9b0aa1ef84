#pragma once

// The eigenforge commands as library functions; main.cpp only forwards argv.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "eigenforge/dataset_io.hpp"
#include "eigenforge/pipeline.hpp"
#include "run_config.hpp"

namespace eigenforge::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitIo = 3 };

/// Generates the problem set described by cfg into cfg.out.
DatasetManifest cmd_gen(const RunConfig& cfg, std::ostream& out);

/// Sorts the stored problems and records the order in the manifest.
SortResult cmd_sort(const std::filesystem::path& dir, std::size_t p0, std::ostream& out);

/// Solves a stored problem set in place (eigenpairs, manifest, run_report.json).
/// scsf reuses a stored solve order when one exists.
RunReport cmd_solve(const std::filesystem::path& dir, const RunConfig& cfg, std::ostream& out);

struct BenchStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct BenchRow {
  RunMode mode = RunMode::scsf;
  BenchStat time;
  BenchStat iterations;
  BenchStat matvecs;
  BenchStat speedup;
  std::size_t failures = 0;
};

struct BenchResult {
  /// chfsi-random, scsf-no-sort, scsf.
  std::vector<BenchRow> rows;
  /// One comparison per repeat (master seed).
  std::vector<ComparisonTable> tables;

  std::string to_text() const;
};

/// Runs the three solver modes on cfg.repeat generated sets (master seeds
/// master_seed + r * n_problems) and writes bench.json to cfg.out.
BenchResult cmd_bench(const RunConfig& cfg, std::ostream& out);

ValidationReport cmd_validate(const std::filesystem::path& dir, std::size_t oracle_cap, std::ostream& out);

/// Full command line (argv[0] is the program name). Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eigenforge::cli
