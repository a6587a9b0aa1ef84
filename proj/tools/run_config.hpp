#pragma once

// Flat "key = value" run configuration shared by every command.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "eigenforge/chfsi.hpp"
#include "eigenforge/operators.hpp"
#include "eigenforge/pipeline.hpp"

namespace eigenforge::cli {

struct RunConfig {
  std::string family = "poisson";
  std::size_t nx = 20;
  std::size_t ny = 20;
  double lx = 1.0;
  double ly = 1.0;
  std::size_t n_problems = 10;
  std::uint64_t master_seed = 0;
  double tau = 3.0;
  double alpha = 2.0;
  /// 0 picks default_field_side(grid).
  std::size_t field_side = 0;

  std::size_t L = 20;
  double tol = 1e-8;
  int m = 20;
  std::size_t p0 = 20;
  /// Unset means ceil(0.2 L).
  std::optional<std::size_t> extra;
  std::size_t max_iters = 200;
  std::size_t stall_iters = 25;

  std::string mode = "scsf";
  std::size_t chunks = 1;
  std::string out = "eigenforge_out";
  std::size_t repeat = 1;
  std::size_t oracle_cap = 2000;
  bool store_vectors = true;

  /// Parses a config document over the current values. Blank lines and
  /// lines starting with '#' are ignored; unknown keys are an error.
  void merge_text(const std::string& text);
  /// Every key, one per line, in a fixed order; merge_text(to_text())
  /// reproduces the same configuration.
  std::string to_text() const;

  /// Applies EIGENFORGE_SEED when set.
  void apply_environment();

  /// This config with `extra` filled in.
  RunConfig resolved() const;

  Family family_tag() const { return parse_family(family); }
  RunMode mode_tag() const { return parse_mode(mode); }
  Grid2D grid() const { return Grid2D{nx, ny, lx, ly}; }
  GrfParams grf() const { return GrfParams{tau, alpha}; }
  SolverConfig solver() const;
  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig load_config(const std::string& path);

}  // namespace eigenforge::cli
