#pragma once

// Chebyshev-filtered subspace iteration for the L eigenpairs of smallest
// magnitude, warm-started from a prior solve or from a random block.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eigenforge/chebyshev.hpp"
#include "eigenforge/error.hpp"
#include "eigenforge/linalg.hpp"

namespace eigenforge {

struct SolverConfig {
  std::size_t L = 20;
  /// Extra subspace columns carried beyond the L wanted ones.
  std::size_t extra = 4;
  int m = kDefaultFilterDegree;
  double tol = 1e-8;
  std::size_t max_iters = 200;
  std::uint64_t seed = 0;
  /// Give up after this many iterations without a new lock or a halving of
  /// the leading unlocked residual; 0 disables the check.
  std::size_t stall_iters = 25;
  std::size_t lanczos_steps = kLanczosSteps;

  /// Paper defaults for a given L (extra = ceil(0.2 L)).
  static SolverConfig for_count(std::size_t L);
  std::size_t width() const { return L + extra; }
  /// Throws InvalidArgument unless 1 <= L, L + extra <= n, tol > 0, m >= 1.
  void validate(std::size_t n) const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

std::size_t default_extra(std::size_t L);

enum class WarmOrigin { previous, random };

struct WarmStart {
  /// Prior eigenvalue estimates, one per column; empty for random starts.
  std::vector<double> values;
  VectorBlock vectors;
  WarmOrigin origin = WarmOrigin::random;
};

/// Spectral edge the plain filter amplifies; `squared` filters in A^2.
enum class FilterEdge { bottom, top, squared };

std::string_view to_string(FilterEdge edge);

struct SolveRecord {
  /// The L wanted pairs ordered by |lambda|, ties by signed value.
  EigenPairs pairs;
  std::vector<double> residuals;
  std::size_t iterations = 0;
  /// Filter and bound-estimation products.
  std::uint64_t matvecs = 0;
  /// Rayleigh-Ritz and residual products.
  std::uint64_t rr_matvecs = 0;
  double filter_flops_estimate = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::size_t> locked_history;
  /// Largest residual among the still-unlocked wanted pairs, per iteration.
  std::vector<double> residual_history;
  /// Unlocked Ritz pairs of the final subspace in target order.
  EigenPairs retained;
  bool converged = false;
  /// "converged", "max_iters" or "stalled".
  std::string status;
  FilterEdge edge = FilterEdge::bottom;
  double worst_residual = 0.0;
};

/// Thrown by chfsi_solve when the iteration gives up; carries the partial
/// record (locked pairs, topped up with the best unlocked ones).
class SolveFailure : public ConvergenceError {
 public:
  SolveFailure(const std::string& what, SolveRecord record)
      : ConvergenceError(what, record.worst_residual), record_(std::move(record)) {}

  const SolveRecord& record() const { return record_; }

 private:
  SolveRecord record_;
};

/// Runs the filter / QR / Rayleigh-Ritz / lock loop until L pairs have
/// relative residual <= tol. Iteration 1 is the Rayleigh-Ritz pass on the
/// starting block, so an exact warm start finishes in one iteration.
SolveRecord chfsi_solve(const DenseHermitian& a, const WarmStart& warm, const SolverConfig& cfg);

/// Orthonormalized Gaussian n x width block, deterministic in seed.
WarmStart random_warm_start(std::size_t n, std::size_t width, std::uint64_t seed);

/// Prior's L vectors, then up to cfg.extra retained Ritz vectors, then
/// random orthonormal padding up to cfg.width().
WarmStart make_warm_start(const SolveRecord& prior, const SolverConfig& cfg);

}  // namespace eigenforge
