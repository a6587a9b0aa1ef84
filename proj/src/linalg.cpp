#include "eigenforge/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eigenforge/error.hpp"

namespace eigenforge {

namespace {

using ColMajorMap = Eigen::Map<Eigen::MatrixXd>;
using ConstColMajorMap = Eigen::Map<const Eigen::MatrixXd>;

// A is symmetric, so its row-major buffer read column-major is A itself.
ConstColMajorMap as_eigen(const DenseHermitian& a) {
  return {a.data().data(), static_cast<Eigen::Index>(a.n()), static_cast<Eigen::Index>(a.n())};
}

ConstColMajorMap as_eigen(const VectorBlock& y) {
  return {y.data().data(), static_cast<Eigen::Index>(y.n()), static_cast<Eigen::Index>(y.k())};
}

ColMajorMap as_eigen(VectorBlock& y) {
  return {y.data().data(), static_cast<Eigen::Index>(y.n()), static_cast<Eigen::Index>(y.k())};
}

// Fixed-order row dot product, independent of buffer alignment.
double row_dot(const double* row, const double* v, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += row[i] * v[i];
    s1 += row[i + 1] * v[i + 1];
    s2 += row[i + 2] * v[i + 2];
    s3 += row[i + 3] * v[i + 3];
  }
  for (; i < n; ++i) s0 += row[i] * v[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseHermitian

DenseHermitian::DenseHermitian(std::size_t n) : n_(n), data_(n * n, 0.0) {
  if (n == 0) throw InvalidArgument("DenseHermitian: dimension must be >= 1");
}

DenseHermitian DenseHermitian::from_row_major(std::size_t n, std::span<const double> data) {
  if (data.size() != n * n) {
    throw DimensionMismatch("DenseHermitian: expected " + std::to_string(n * n) +
                            " entries, got " + std::to_string(data.size()));
  }
  DenseHermitian a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.data_[i * n + i] = data[i * n + i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (data[i * n + j] + data[j * n + i]);
      a.data_[i * n + j] = v;
      a.data_[j * n + i] = v;
    }
  }
  return a;
}

DenseHermitian DenseHermitian::identity(std::size_t n) {
  DenseHermitian a(n);
  for (std::size_t i = 0; i < n; ++i) a.data_[i * n + i] = 1.0;
  return a;
}

DenseHermitian DenseHermitian::diagonal(std::span<const double> diag) {
  DenseHermitian a(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) a.data_[i * a.n_ + i] = diag[i];
  return a;
}

void DenseHermitian::set(std::size_t i, std::size_t j, double v) {
  data_[i * n_ + j] = v;
  data_[j * n_ + i] = v;
}

void DenseHermitian::add(std::size_t i, std::size_t j, double v) {
  data_[i * n_ + j] += v;
  if (i != j) data_[j * n_ + i] += v;
}

double DenseHermitian::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double DenseHermitian::frobenius() const { return norm2(data_); }

// ---------------------------------------------------------------------------
// VectorBlock

VectorBlock::VectorBlock(std::size_t n, std::size_t k) : n_(n), k_(k), data_(n * k, 0.0) {
  if (k > n) throw InvalidArgument("VectorBlock: k must not exceed n");
}

VectorBlock VectorBlock::gaussian(std::size_t n, std::size_t k, Rng& rng) {
  VectorBlock y(n, k);
  std::normal_distribution<double> normal;
  for (double& x : y.data_) x = normal(rng);
  return y;
}

VectorBlock VectorBlock::identity(std::size_t n, std::size_t k) {
  VectorBlock y(n, k);
  for (std::size_t j = 0; j < k; ++j) y(j, j) = 1.0;
  return y;
}

VectorBlock VectorBlock::columns(std::size_t first, std::size_t count) const {
  if (first + count > k_) throw DimensionMismatch("VectorBlock::columns out of range");
  VectorBlock out(n_, count);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * n_), count * n_,
              out.data_.begin());
  return out;
}

VectorBlock VectorBlock::select(std::span<const std::size_t> which) const {
  VectorBlock out(n_, which.size());
  for (std::size_t j = 0; j < which.size(); ++j) {
    if (which[j] >= k_) throw DimensionMismatch("VectorBlock::select out of range");
    std::copy_n(col(which[j]).begin(), n_, out.col(j).begin());
  }
  return out;
}

VectorBlock VectorBlock::append(const VectorBlock& other) const {
  if (other.n_ != n_) throw DimensionMismatch("VectorBlock::append row mismatch");
  VectorBlock out(n_, k_ + other.k_);
  std::copy(data_.begin(), data_.end(), out.data_.begin());
  std::copy(other.data_.begin(), other.data_.end(),
            out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Kernels

double norm2(std::span<const double> v) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) {
    const double r = x / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  return row_dot(a.data(), b.data(), a.size());
}

VectorBlock matmul_block(const DenseHermitian& a, const VectorBlock& y, MatvecCounter* counter) {
  if (y.n() != a.n()) {
    throw DimensionMismatch("matmul_block: A is " + std::to_string(a.n()) + "x" +
                            std::to_string(a.n()) + ", Y has " + std::to_string(y.n()) + " rows");
  }
  VectorBlock out(y.n(), y.k());
  as_eigen(out).noalias() = as_eigen(a) * as_eigen(y);
  if (counter) counter->count += y.k();
  return out;
}

QrResult qr_orthonormalize(const VectorBlock& y, std::uint64_t seed) {
  const std::size_t n = y.n();
  const std::size_t k = y.k();
  QrResult result;
  if (k == 0) {
    result.q = y;
    return result;
  }
  VectorBlock w = y;
  double max_norm = 0.0;
  for (std::size_t j = 0; j < k; ++j) max_norm = std::max(max_norm, norm2(w.col(j)));
  const double drop = 1e-12 * max_norm;

  // Householder vectors (length n - j, stored full length for simplicity).
  std::vector<std::vector<double>> reflectors(k);
  std::vector<double> taus(k, 0.0);
  std::vector<double> diag_sign(k, 1.0);
  Rng rng(seed);
  std::normal_distribution<double> normal;

  auto apply_reflector = [&](std::size_t r, std::span<double> x) {
    const auto& v = reflectors[r];
    if (taus[r] == 0.0) return;
    double s = 0.0;
    for (std::size_t i = r; i < n; ++i) s += v[i] * x[i];
    s *= taus[r];
    for (std::size_t i = r; i < n; ++i) x[i] -= s * v[i];
  };

  for (std::size_t j = 0; j < k; ++j) {
    auto x = w.col(j);
    double norm_x = norm2(x.subspan(j));
    int attempts = 0;
    while (!(norm_x > drop) || max_norm == 0.0) {
      // Numerically dependent: swap in a random direction projected against
      // the previous reflectors.
      const double scale = max_norm > 0.0 ? max_norm / std::sqrt(static_cast<double>(n)) : 1.0;
      for (std::size_t i = 0; i < n; ++i) x[i] = scale * normal(rng);
      for (std::size_t r = 0; r < j; ++r) apply_reflector(r, x);
      norm_x = norm2(x.subspan(j));
      if (attempts++ == 0) result.replaced.push_back(j);
      if (max_norm == 0.0 && norm_x > 1e-8) break;
      if (attempts > 8) throw Error("qr_orthonormalize: cannot complete basis");
    }

    auto& v = reflectors[j];
    v.assign(n, 0.0);
    for (std::size_t i = j; i < n; ++i) v[i] = x[i];
    const double alpha = x[j] >= 0.0 ? -norm_x : norm_x;
    v[j] -= alpha;
    double vtv = 0.0;
    for (std::size_t i = j; i < n; ++i) vtv += v[i] * v[i];
    taus[j] = vtv > 0.0 ? 2.0 / vtv : 0.0;
    diag_sign[j] = alpha >= 0.0 ? 1.0 : -1.0;

    for (std::size_t c = j + 1; c < k; ++c) apply_reflector(j, w.col(c));
  }

  VectorBlock q = VectorBlock::identity(n, k);
  for (std::size_t r = k; r-- > 0;) {
    for (std::size_t c = r; c < k; ++c) apply_reflector(r, q.col(c));
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (diag_sign[j] < 0.0) {
      for (double& e : q.col(j)) e = -e;
    }
  }
  result.q = std::move(q);
  return result;
}

DenseHermitian rayleigh_quotient_from_product(const VectorBlock& q, const VectorBlock& aq) {
  if (q.n() != aq.n() || q.k() != aq.k()) throw DimensionMismatch("rayleigh_quotient: Q vs AQ");
  const Eigen::MatrixXd g = as_eigen(q).transpose() * as_eigen(aq);
  const std::size_t k = q.k();
  std::vector<double> buf(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      buf[i * k + j] = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return DenseHermitian::from_row_major(k, buf);
}

DenseHermitian rayleigh_quotient(const DenseHermitian& a, const VectorBlock& q,
                                 MatvecCounter* counter) {
  return rayleigh_quotient_from_product(q, matmul_block(a, q, counter));
}

EigenPairs small_symmetric_eig(const DenseHermitian& g) {
  const std::size_t k = g.n();
  std::vector<double> a(g.data().begin(), g.data().end());
  std::vector<double> v(k * k, 0.0);  // row-major, columns are eigenvectors
  for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 1.0;

  const double norm_f = g.frobenius();
  const double threshold = kJacobiOffTolerance * norm_f;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (i != j) s += a[i * k + j] * a[i * k + j];
    return std::sqrt(s);
  };

  double off = off_norm();
  int sweep = 0;
  while (off > threshold) {
    if (sweep++ == kJacobiMaxSweeps) {
      throw ConvergenceError("small_symmetric_eig: Jacobi did not converge in " +
                                 std::to_string(kJacobiMaxSweeps) + " sweeps",
                             off);
    }
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = a[p * k + q];
        if (apq == 0.0) continue;
        const double app = a[p * k + p];
        const double aqq = a[q * k + q];
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < k; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * k + p];
          const double arq = a[r * k + q];
          const double np = c * arp - s * arq;
          const double nq = s * arp + c * arq;
          a[r * k + p] = np;
          a[p * k + r] = np;
          a[r * k + q] = nq;
          a[q * k + r] = nq;
        }
        a[p * k + p] = app - t * apq;
        a[q * k + q] = aqq + t * apq;
        a[p * k + q] = 0.0;
        a[q * k + p] = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
          const double vrp = v[r * k + p];
          const double vrq = v[r * k + q];
          v[r * k + p] = c * vrp - s * vrq;
          v[r * k + q] = s * vrp + c * vrq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * k + x] < a[y * k + y]; });
  EigenPairs out;
  out.values.resize(k);
  out.vectors = VectorBlock(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a[src * k + src];
    for (std::size_t i = 0; i < k; ++i) out.vectors(i, j) = v[i * k + src];
  }
  return out;
}

std::vector<std::size_t> magnitude_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double ax = std::abs(values[x]);
    const double ay = std::abs(values[y]);
    if (ax != ay) return ax < ay;
    return values[x] < values[y];
  });
  return order;
}

EigenPairs sort_by_magnitude(const EigenPairs& pairs) {
  const auto order = magnitude_order(pairs.values);
  EigenPairs out;
  out.values.reserve(order.size());
  for (std::size_t i : order) out.values.push_back(pairs.values[i]);
  out.vectors = pairs.vectors.select(order);
  return out;
}

EigenPairs dense_eig_oracle(const DenseHermitian& a, std::size_t count) {
  const std::size_t n = a.n();
  if (n > kOracleMaxDim) {
    throw InvalidArgument("dense_eig_oracle: n = " + std::to_string(n) + " exceeds cap " +
                          std::to_string(kOracleMaxDim));
  }
  if (count == 0 || count > n) throw InvalidArgument("dense_eig_oracle: count must be in [1, n]");
  const Eigen::MatrixXd dense = as_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense_eig_oracle failed", 0.0);
  const auto& ev = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  std::vector<double> all(ev.data(), ev.data() + n);
  const auto order = magnitude_order(all);
  EigenPairs out;
  out.values.resize(count);
  out.vectors = VectorBlock(n, count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto src = static_cast<Eigen::Index>(order[j]);
    out.values[j] = all[order[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = vecs(static_cast<Eigen::Index>(i), src);
  }
  return out;
}

std::vector<double> dense_eigenvalues(const DenseHermitian& a) {
  if (a.n() > kOracleMaxDim) throw InvalidArgument("dense_eigenvalues: n exceeds oracle cap");
  const Eigen::MatrixXd dense = as_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense_eigenvalues failed", 0.0);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double relative_residual(const DenseHermitian& a, std::span<const double> v, double lambda) {
  const std::size_t n = a.n();
  if (v.size() != n) throw DimensionMismatch("relative_residual: vector length");
  const double* rows = a.data().data();
  double scale_num = 0.0, sum_num = 0.0;
  double scale_den = 0.0, sum_den = 0.0;
  // Scaled accumulation of the two 2-norms in one pass.
  auto accumulate = [](double x, double& scale, double& sum) {
    if (x == 0.0) return;
    const double ax = std::abs(x);
    if (ax > scale) {
      sum = 1.0 + sum * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      sum += (ax / scale) * (ax / scale);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double av = row_dot(rows + i * n, v.data(), n);
    accumulate(av - lambda * v[i], scale_num, sum_num);
    accumulate(av, scale_den, sum_den);
  }
  const double num = scale_num * std::sqrt(sum_num);
  double den = scale_den * std::sqrt(sum_den);
  if (den == 0.0) den = norm2(v);
  return num / den;
}

std::vector<double> relative_residuals(const DenseHermitian& a, const EigenPairs& pairs) {
  if (pairs.vectors.n() != a.n() || pairs.vectors.k() != pairs.values.size()) {
    throw DimensionMismatch("relative_residuals: inconsistent pairs");
  }
  std::vector<double> out(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    out[j] = relative_residual(a, pairs.vectors.col(j), pairs.values[j]);
  }
  return out;
}

double orthonormality_error(const VectorBlock& q) {
  const Eigen::MatrixXd gram = as_eigen(q).transpose() * as_eigen(q);
  double err = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      err = std::max(err, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
  return err;
}

}  // namespace eigenforge
