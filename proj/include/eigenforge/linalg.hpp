#pragma once

// Dense real-symmetric kernels shared by the solver, the oracle and the tests.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eigenforge/random.hpp"

namespace eigenforge {

/// Counts matrix-vector products; a block product of width k adds k.
struct MatvecCounter {
  std::uint64_t count = 0;
};

/// n x n real symmetric matrix, row-major. Symmetry is exact: every
/// constructor stores the symmetrized value.
class DenseHermitian {
 public:
  DenseHermitian() = default;
  explicit DenseHermitian(std::size_t n);

  /// Stores (M + M^T)/2 of the given row-major n x n data.
  static DenseHermitian from_row_major(std::size_t n, std::span<const double> data);
  static DenseHermitian identity(std::size_t n);
  static DenseHermitian diagonal(std::span<const double> diag);

  std::size_t n() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  /// Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v);
  /// Adds v to (i, j) and (j, i); the diagonal gets v once.
  void add(std::size_t i, std::size_t j, double v);

  std::span<const double> data() const { return data_; }
  double max_abs() const;
  double frobenius() const;

  friend bool operator==(const DenseHermitian&, const DenseHermitian&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// n x k block of column vectors, column-major.
class VectorBlock {
 public:
  VectorBlock() = default;
  VectorBlock(std::size_t n, std::size_t k);

  static VectorBlock gaussian(std::size_t n, std::size_t k, Rng& rng);
  /// First k columns of the n x n identity.
  static VectorBlock identity(std::size_t n, std::size_t k);

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[j * n_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * n_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * n_, n_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * n_, n_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Columns [first, first + count).
  VectorBlock columns(std::size_t first, std::size_t count) const;
  /// Columns listed in `which`, in that order.
  VectorBlock select(std::span<const std::size_t> which) const;
  /// [this | other].
  VectorBlock append(const VectorBlock& other) const;

  friend bool operator==(const VectorBlock&, const VectorBlock&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> data_;
};

/// Eigenvalues with their eigenvector columns. Ordering depends on the
/// producer: small_symmetric_eig is ascending by value, the oracle and the
/// solvers ascending by |value| with ties by signed value.
struct EigenPairs {
  std::vector<double> values;
  VectorBlock vectors;

  std::size_t size() const { return values.size(); }
};

/// A * Y. Adds Y.k() to `counter` when given.
VectorBlock matmul_block(const DenseHermitian& a, const VectorBlock& y,
                         MatvecCounter* counter = nullptr);

struct QrResult {
  VectorBlock q;
  /// Columns that were numerically dependent and got a random replacement.
  std::vector<std::size_t> replaced;
};

/// Householder QR; returns the explicit orthonormal factor with R_jj > 0.
/// Columns whose projected norm drops below 1e-12 * (largest column norm)
/// are replaced by random directions orthogonal to the previous ones.
QrResult qr_orthonormalize(const VectorBlock& y, std::uint64_t seed = 0x5eed);

/// G = Q^T A Q, symmetrized.
DenseHermitian rayleigh_quotient(const DenseHermitian& a, const VectorBlock& q,
                                 MatvecCounter* counter = nullptr);

/// Same, reusing a precomputed A*Q.
DenseHermitian rayleigh_quotient_from_product(const VectorBlock& q, const VectorBlock& aq);

/// Full spectrum of a small symmetric matrix by cyclic Jacobi rotations,
/// ascending by value. Throws ConvergenceError after 100 sweeps.
EigenPairs small_symmetric_eig(const DenseHermitian& g);

/// Sweep cap and off-diagonal threshold (relative to ||G||_F) of the Jacobi solver.
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiOffTolerance = 1e-14;

/// Largest dimension the dense oracle accepts.
inline constexpr std::size_t kOracleMaxDim = 2000;

/// The `count` eigenpairs smallest in |lambda|, ties by signed value.
EigenPairs dense_eig_oracle(const DenseHermitian& a, std::size_t count);

/// Full ascending spectrum without vectors (oracle route, used by tests
/// and by spectral checks that need all eigenvalues).
std::vector<double> dense_eigenvalues(const DenseHermitian& a);

/// ||A v_j - lambda_j v_j|| / ||A v_j||; when A v_j vanishes the
/// denominator becomes ||v_j||.
std::vector<double> relative_residuals(const DenseHermitian& a, const EigenPairs& pairs);

/// Residual of a single pair, computed with the same per-column product as
/// relative_residuals.
double relative_residual(const DenseHermitian& a, std::span<const double> v, double lambda);

/// Permutation sorting `values` by |value|, ties by signed value.
std::vector<std::size_t> magnitude_order(std::span<const double> values);

/// Reorders pairs by magnitude_order.
EigenPairs sort_by_magnitude(const EigenPairs& pairs);

/// max |(Q^T Q - I)_ij|.
double orthonormality_error(const VectorBlock& q);

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace eigenforge
