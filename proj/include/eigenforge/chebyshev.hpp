#pragma once

// Scaled Chebyshev polynomial filtering of vector blocks and the spectral
// estimates that parameterize it.

#include <cstddef>
#include <cstdint>
#include <span>

#include "eigenforge/linalg.hpp"

namespace eigenforge {

/// Degree-m filter damping [center - half_width, center + half_width] and
/// normalized to 1 at `lambda`, which must lie outside that interval.
class FilterParams {
 public:
  FilterParams(int degree, double lambda, double center, double half_width);

  /// Interval given by its edges.
  static FilterParams from_interval(int degree, double lambda, double alpha, double beta);

  int degree() const { return degree_; }
  double lambda() const { return lambda_; }
  double center() const { return center_; }
  double half_width() const { return half_width_; }
  double alpha() const { return center_ - half_width_; }
  double beta() const { return center_ + half_width_; }

 private:
  int degree_;
  double lambda_;
  double center_;
  double half_width_;
};

/// `squared` filters with the polynomial in A^2 (two products per step).
enum class FilterOperator { plain, squared };

/// Three-term scaled Chebyshev recurrence applied to every column of y0:
/// rho_m((A - cI)/e) y0 with rho_m(lambda) = 1. Adds m * y0.k() to
/// `counter` (twice that for the squared operator).
VectorBlock chebyshev_filter(const DenseHermitian& a, const VectorBlock& y0, const FilterParams& params,
                             MatvecCounter* counter = nullptr,
                             FilterOperator op = FilterOperator::plain);

/// The same recurrence evaluated on a scalar eigenvalue x.
double filter_polynomial(double x, const FilterParams& params);

/// Interval from prior eigenvalues (any order): lambda is the smallest
/// signed value, alpha the largest moved up by 1% of the prior window
/// width, beta = upper_bound + 1% of |upper_bound|. Throws when
/// upper_bound <= alpha.
FilterParams build_filter_params(std::span<const double> prior_values, double upper_bound, int m);

/// Relative margin applied to both interval edges.
inline constexpr double kIntervalMargin = 0.01;

struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  /// Extreme Ritz values of the Lanczos tridiagonal.
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  /// Krylov space became invariant; the extreme Ritz values are exact.
  bool exhausted = false;
};

/// k-step Lanczos with full reorthogonalization from a seeded random unit
/// vector; bounds are the extreme Ritz values widened by
/// beta_k * sqrt(|s_k|). Costs k matvecs.
SpectralBounds estimate_spectral_bounds(const DenseHermitian& a, std::size_t k, std::uint64_t seed,
                                        MatvecCounter* counter = nullptr);

/// Upper half of estimate_spectral_bounds.
double estimate_upper_bound(const DenseHermitian& a, std::size_t k, std::uint64_t seed,
                            MatvecCounter* counter = nullptr);

inline constexpr std::size_t kLanczosSteps = 12;
inline constexpr int kDefaultFilterDegree = 20;

}  // namespace eigenforge
