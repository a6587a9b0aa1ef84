#pragma once

// On-disk datasets: manifest.json plus headerless little-endian float64
// arrays (row-major, shapes recorded only in the manifest).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigenforge/fft_sort.hpp"
#include "eigenforge/operators.hpp"
#include "eigenforge/pipeline.hpp"

namespace eigenforge {

inline constexpr int kFormatVersion = 1;

struct FieldEntry {
  /// K, p, k, D, rho or coeffs.
  std::string role;
  FieldKind kind = FieldKind::grf;
  std::size_t p = 0;
  std::uint64_t seed = 0;
  std::string file;

  friend bool operator==(const FieldEntry&, const FieldEntry&) = default;
};

struct SolveSummary {
  double residual_max = 0.0;
  std::size_t iterations = 0;
  std::uint64_t matvecs = 0;
  double wall_seconds = 0.0;
  bool converged = false;
  std::string status;
  std::string eigenvalues_file;
  /// Empty when vectors are not stored.
  std::string eigenvectors_file;

  friend bool operator==(const SolveSummary&, const SolveSummary&) = default;
};

struct ProblemEntry {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<FieldEntry> fields;
  std::optional<EllipticCoeffs> coeffs;
  bool symmetrized = false;
  double asymmetry_norm = 0.0;
  std::optional<SolveSummary> solve;
};

struct SortInfo {
  std::size_t p0 = 0;
  double fft_seconds = 0.0;
  double greedy_seconds = 0.0;

  friend bool operator==(const SortInfo&, const SortInfo&) = default;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  Family family = Family::poisson;
  Grid2D grid;
  std::size_t N = 0;
  std::size_t L = 0;
  double tol = 0.0;
  std::uint64_t master_seed = 0;
  GrfParams grf;
  std::size_t field_side = 0;
  std::optional<SolveOrder> solve_order;
  std::optional<SortInfo> sort;
  bool solved = false;
  std::string mode;
  bool vectors_stored = true;
  std::vector<ProblemEntry> problems;
};

struct Dataset {
  DatasetManifest manifest;
  /// Coefficient fields per problem, in manifest order.
  std::vector<std::vector<ParameterField>> fields;
  /// Stored eigenpairs per problem (empty when unsolved; vectors empty
  /// when not stored).
  std::vector<EigenPairs> eigenpairs;
};

/// Raw float64 array I/O. write_f64 is byte-deterministic; read_f64 throws
/// LengthMismatch (naming the file) when the size is not 8 * expected.
void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected);

/// Manifest <-> JSON text (keys sorted, doubles round-trip exactly).
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);

DatasetManifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);

/// Field roles of a family, in OperatorSpec::fields order.
std::vector<std::string> field_roles(Family family);

/// Manifest skeleton for a problem set (no solve information).
DatasetManifest problem_set_manifest(std::span<const Problem> problems, std::uint64_t master_seed,
                                     const GrfParams& grf, std::size_t field_side);

/// Writes the field arrays and manifest of an unsolved problem set.
void write_problem_set(const std::filesystem::path& dir, std::span<const Problem> problems,
                       const DatasetManifest& manifest);

/// Writes fields, eigenpairs of every result and the manifest. `manifest`
/// supplies the set-level fields; per-problem solve entries are filled from
/// the report.
void write_dataset(const std::filesystem::path& dir, std::span<const Problem> problems,
                   const RunReport& report, DatasetManifest manifest, bool store_vectors = true);

/// Loads and checks every referenced array.
Dataset read_dataset(const std::filesystem::path& dir);

/// Problems rebuilt from stored fields. Matrices are assembled only when
/// `assemble` is set.
std::vector<Problem> rebuild_problems(const Dataset& dataset, bool assemble = true);

struct ValidationEntry {
  std::size_t id = 0;
  double max_residual = 0.0;
  /// NaN when the oracle check was skipped.
  double max_deviation = 0.0;
  bool oracle_checked = false;
  std::vector<std::string> issues;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  double max_residual = 0.0;
  double max_deviation = 0.0;
  std::size_t oracle_checked = 0;

  bool clean() const;
  std::string to_text() const;
};

/// Recomputes residuals against rediscretized matrices; for n <= oracle_cap
/// compares values with the dense oracle (flagged beyond
/// max(1e-8, 10 tol) * ||A||_max).
ValidationReport validate_dataset(const std::filesystem::path& dir, std::size_t oracle_cap);

/// Machine-readable run report and comparison table.
std::string report_to_json(const RunReport& report);
std::string comparison_to_json(const ComparisonTable& table);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace eigenforge
