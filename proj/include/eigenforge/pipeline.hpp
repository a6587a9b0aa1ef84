#pragma once

// End-to-end runs over a problem set: optional sorting, chunked sequential
// warm-started solves, and comparison of run modes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eigenforge/chfsi.hpp"
#include "eigenforge/fft_sort.hpp"
#include "eigenforge/operators.hpp"

namespace eigenforge {

enum class RunMode { scsf, scsf_no_sort, chfsi_random, oracle };

/// "scsf", "scsf-no-sort", "chfsi-random", "oracle".
std::string_view to_string(RunMode mode);
RunMode parse_mode(std::string_view name);

struct RunPlan {
  RunMode mode = RunMode::scsf;
  SolverConfig solver;
  std::size_t p0 = 20;
  std::size_t chunks = 1;
  /// Mixed with each problem's seed to seed its solver.
  std::uint64_t seed = 0;
  /// Use this order instead of sorting (scsf only).
  std::optional<SolveOrder> order;
};

struct ProblemResult {
  /// Position in the input problem list.
  std::size_t index = 0;
  std::size_t id = 0;
  std::size_t n = 0;
  bool symmetrized = false;
  double asymmetry_norm = 0.0;
  double norm_max = 0.0;
  WarmOrigin origin = WarmOrigin::random;
  SolveRecord record;
  bool failed = false;
  std::string error;
};

struct RunAggregates {
  double mean_wall_seconds = 0.0;
  /// mean_wall_seconds plus the sort time spread over all problems.
  double mean_time_with_sort = 0.0;
  double mean_iterations = 0.0;
  double mean_matvecs = 0.0;
  double mean_flops = 0.0;
  std::size_t failures = 0;
};

struct RunReport {
  RunMode mode = RunMode::scsf;
  RunPlan plan;
  /// Indices into the input list, in the order they were solved.
  SolveOrder order;
  /// One entry per problem, in solve order.
  std::vector<ProblemResult> results;
  SortResult sort;
  RunAggregates aggregates;

  bool ok() const { return aggregates.failures == 0; }
};

/// Arithmetic means over report.results (and the sort amortization).
RunAggregates aggregate(const RunReport& report);

/// Solves every problem according to plan.mode. Chunks are contiguous
/// slices of the solve order run on separate threads; each chunk starts
/// from a random block. Solver failures are recorded, not thrown.
RunReport run(std::span<const Problem> problems, const RunPlan& plan);

/// First index of each chunk when `count` items are split into `chunks`
/// contiguous near-equal parts (plus `count` at the end).
std::vector<std::size_t> chunk_bounds(std::size_t count, std::size_t chunks);

struct ComparisonRow {
  RunMode mode = RunMode::scsf;
  double mean_time = 0.0;
  double mean_iterations = 0.0;
  double mean_matvecs = 0.0;
  double mean_flops = 0.0;
  double speedup = 1.0;
  std::size_t failures = 0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  std::string to_text() const;
};

/// One row per report; speedup is the first report's mean time (sort
/// included) over each row's. Throws InvalidArgument when the reports do not
/// cover the same problems with the same solver configuration.
ComparisonTable compare(std::span<const RunReport> reports);

}  // namespace eigenforge
