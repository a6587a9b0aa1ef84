#pragma once

// Random coefficient fields and finite-difference discretization of the four
// operator families on uniform 2D grids with Dirichlet boundaries.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eigenforge/linalg.hpp"

namespace eigenforge {

enum class Family { poisson, elliptic, helmholtz, vibration };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Interior-point grid on [0, lx] x [0, ly]. Unknowns are numbered
/// row-major: index = iy * nx + ix.
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  double dx() const { return lx / static_cast<double>(nx + 1); }
  double dy() const { return ly / static_cast<double>(ny + 1); }
  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
  /// Throws InvalidArgument unless nx, ny >= 2 and lx, ly > 0.
  void validate() const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

enum class FieldKind { grf, constant_tuple };

std::string_view to_string(FieldKind kind);
FieldKind parse_field_kind(std::string_view name);

/// p x p row-major coefficient grid.
struct ParameterField {
  std::size_t p = 0;
  std::vector<double> values;
  FieldKind kind = FieldKind::grf;
  std::uint64_t seed = 0;

  double at(std::size_t row, std::size_t col) const { return values[row * p + col]; }

  friend bool operator==(const ParameterField&, const ParameterField&) = default;
};

struct GrfParams {
  double tau = 3.0;
  double alpha = 2.0;
};

/// Standard deviation of the log of a positive GRF field.
inline constexpr double kGrfLogStd = 0.3;
/// Helmholtz wavenumber fields are scaled into [0, kWavenumberMax].
inline constexpr double kWavenumberMax = 10.0;

/// Zero-mean Gaussian field g by spectral synthesis: white noise is
/// transformed, mode (kx, ky) scaled by (4 pi^2 |k|^2 + tau^2)^(-alpha/2),
/// and transformed back.
std::vector<double> grf_raw(std::size_t p, std::uint64_t seed, double tau, double alpha);

/// Positive field exp(kGrfLogStd * g / rms(g)).
ParameterField grf_sample(std::size_t p, std::uint64_t seed, double tau, double alpha);

/// Raw GRF min-max scaled to [0, kWavenumberMax].
ParameterField grf_wavenumber(std::size_t p, std::uint64_t seed, double tau, double alpha);

/// Constant coefficients of a11 u_xx + a12 u_xy + a22 u_yy + a1 u_x + a2 u_y + a0 u.
struct EllipticCoeffs {
  double a11 = 0, a12 = 0, a22 = 0, a1 = 0, a2 = 0, a0 = 0;
  /// Rejection-sampling draws consumed (>= 1).
  std::size_t attempts = 1;

  bool is_elliptic() const { return 4.0 * a11 * a22 > a12 * a12; }
  /// (a11, a12, a22, a1, a2, a0).
  std::array<double, 6> as_array() const { return {a11, a12, a22, a1, a2, a0}; }
  static EllipticCoeffs from_array(const std::array<double, 6>& c);
};

/// Side length of the coefficient-tuple field used to sort elliptic problems.
inline constexpr std::size_t kTupleFieldSide = 8;

EllipticCoeffs sample_elliptic_coeffs(std::uint64_t seed);

/// The tuple in the first six entries of an 8 x 8 zero field.
ParameterField broadcast_coeffs(const EllipticCoeffs& c, std::uint64_t seed);

/// fields: poisson {K}; helmholtz {p, k}; vibration {D, rho}; elliptic {tuple}.
struct OperatorSpec {
  Family family = Family::poisson;
  Grid2D grid;
  std::vector<ParameterField> fields;
  std::optional<EllipticCoeffs> coeffs;
};

struct Discretization {
  DenseHermitian matrix;
  /// Diagonal mass rho at the nodes (vibration only).
  std::vector<double> mass;
  bool symmetrized = false;
  /// ||M - M^T||_F of the assembled matrix before symmetrization.
  double asymmetry_norm = 0.0;
};

/// Bilinear resampling of a field onto the interior nodes; field corners map
/// to the corner nodes, so p == nx reproduces the field exactly.
std::vector<double> resample_to_grid(const ParameterField& field, const Grid2D& grid);

/// Flux-form -div(K grad u) with face-averaged K; boundary faces use the
/// interior node's K.
DenseHermitian flux_diffusion(const Grid2D& grid, std::span<const double> node_k);

/// Five-point -Laplacian.
DenseHermitian laplacian(const Grid2D& grid);

Discretization discretize(const OperatorSpec& spec);

struct Problem {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  OperatorSpec spec;
  Discretization disc;

  const DenseHermitian& matrix() const { return disc.matrix; }
};

/// Smallest power of two >= max(nx, ny), at least 4.
std::size_t default_field_side(const Grid2D& grid);

/// Fields (and coefficients) of one problem, deterministic in `seed`.
OperatorSpec make_spec(Family family, const Grid2D& grid, std::uint64_t seed,
                       const GrfParams& grf = {}, std::size_t field_side = 0);

/// N problems with seeds master_seed + index, in generation order. With
/// assemble = false only the specs are built (matrices are left empty and
/// regenerated on demand by the pipeline).
std::vector<Problem> generate_problem_set(Family family, std::size_t count, const Grid2D& grid,
                                          std::uint64_t master_seed, const GrfParams& grf = {},
                                          std::size_t field_side = 0, bool assemble = true);

}  // namespace eigenforge
