#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "eigenforge/error.hpp"
#include "eigenforge/linalg.hpp"
#include "oracles.hpp"

using namespace eigenforge;

namespace {

DenseHermitian diag(std::vector<double> d) { return DenseHermitian::diagonal(d); }

// 1D Dirichlet tridiagonal(-2, 1)/dx^2, N interior points.
DenseHermitian tridiagonal(std::size_t n, double dx) {
  DenseHermitian a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.set(i, i, -2.0 / (dx * dx));
    if (i + 1 < n) a.set(i, i + 1, 1.0 / (dx * dx));
  }
  return a;
}

double max_offdiag_gram(const VectorBlock& q) { return orthonormality_error(q); }

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("construction stores the symmetrized value") {
  const std::vector<double> m{1, 2, 3, 4, 5, 6, 7, 8, 10};
  const auto a = DenseHermitian::from_row_major(3, m);
  CHECK(a(0, 1) == 3.0);
  CHECK(a(1, 0) == 3.0);
  CHECK(a(0, 2) == 5.0);
  CHECK(a(2, 1) == 7.0);
  CHECK(a(2, 2) == 10.0);
  const auto r = oracle::random_symmetric(40, 3);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j) CHECK(r(i, j) == r(j, i));
  CHECK_THROWS_AS(DenseHermitian::from_row_major(3, std::vector<double>(8)), DimensionMismatch);
}

TEST_CASE("set and add mirror entries") {
  DenseHermitian a(3);
  a.set(0, 2, 1.5);
  a.add(0, 2, 1.0);
  a.add(1, 1, 2.0);
  CHECK(a(2, 0) == 2.5);
  CHECK(a(1, 1) == 2.0);
}

TEST_CASE("matmul_block: identity, diagonal action, counter") {
  Rng rng(1);
  const auto y = VectorBlock::gaussian(3, 2, rng);
  MatvecCounter c;
  CHECK(matmul_block(DenseHermitian::identity(3), y, &c) == y);
  CHECK(c.count == 2);

  const auto e2 = VectorBlock::identity(3, 2).columns(1, 1);
  const auto out = matmul_block(diag({1, 2, 3}), e2, &c);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(1, 0) == 2.0);
  CHECK(out(2, 0) == 0.0);
  CHECK(c.count == 3);

  CHECK_THROWS_AS(matmul_block(DenseHermitian::identity(4), y), DimensionMismatch);
}

TEST_CASE("matmul_block matches the triple loop on the 1D stencil") {
  const auto a = tridiagonal(4, 0.2);
  VectorBlock ones(4, 1);
  for (std::size_t i = 0; i < 4; ++i) ones(i, 0) = 1.0;
  const auto got = matmul_block(a, ones);
  const auto want = oracle::naive_product(a, ones);
  for (std::size_t i = 0; i < 4; ++i) CHECK(got(i, 0) == doctest::Approx(want[i]).epsilon(1e-14));
  CHECK(want[0] == doctest::Approx(-25.0));
  CHECK(want[1] == doctest::Approx(0.0));

  const auto r = oracle::random_symmetric(37, 8);
  Rng rng(2);
  const auto y = VectorBlock::gaussian(37, 5, rng);
  const auto g2 = matmul_block(r, y);
  const auto w2 = oracle::naive_product(r, y);
  for (std::size_t i = 0; i < w2.size(); ++i) CHECK(std::abs(g2.data()[i] - w2[i]) < 1e-12);
}

TEST_CASE("qr: unit columns, exact rank deficiency, Gram check") {
  const auto e = VectorBlock::identity(3, 2);
  const auto q = qr_orthonormalize(e);
  CHECK(q.replaced.empty());
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(q.q(i, j)) == doctest::Approx(e(i, j)));

  VectorBlock dep(3, 2);
  dep(0, 0) = 1.0;
  dep(0, 1) = 2.0;
  const auto qd = qr_orthonormalize(dep);
  REQUIRE(qd.replaced.size() == 1);
  CHECK(qd.replaced[0] == 1);
  CHECK(max_offdiag_gram(qd.q) < 1e-12);

  Rng rng(50);
  const auto y = VectorBlock::gaussian(50, 10, rng);
  CHECK(orthonormality_error(qr_orthonormalize(y).q) < 1e-12);
}

TEST_CASE("qr property: orthonormal and spanning across shapes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 5 + seed * 7;
    const std::size_t k = 1 + (seed * 13) % n;
    const auto y = VectorBlock::gaussian(n, k, rng);
    const auto q = qr_orthonormalize(y).q;
    CHECK(orthonormality_error(q) < 1e-12);
    // Reconstruct every input column from its projection on Q.
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> r(y.col(j).begin(), y.col(j).end());
      for (std::size_t c = 0; c < k; ++c) {
        const double d = dot(q.col(c), y.col(j));
        for (std::size_t i = 0; i < n; ++i) r[i] -= d * q(i, c);
      }
      worst = std::max(worst, norm2(r) / norm2(y.col(j)));
    }
    CHECK(worst < 1e-10);
    // Positive R diagonal.
    for (std::size_t j = 0; j < k; ++j) CHECK(dot(q.col(j), y.col(j)) > 0.0);
  }
}

TEST_CASE("rayleigh_quotient: identity basis, selected axes, interlacing") {
  const auto a = oracle::random_symmetric(6, 4);
  CHECK(rayleigh_quotient(a, VectorBlock::identity(6, 6)) == a);

  VectorBlock q(3, 2);
  q(0, 0) = 1.0;
  q(2, 1) = 1.0;
  MatvecCounter c;
  const auto g = rayleigh_quotient(diag({1, 2, 3}), q, &c);
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == 3.0);
  CHECK(g(0, 1) == 0.0);
  CHECK(c.count == 2);

  const auto r = oracle::random_symmetric(20, 11);
  Rng rng(12);
  const auto qq = qr_orthonormalize(VectorBlock::gaussian(20, 5, rng)).q;
  const auto mu = dense_eigenvalues(rayleigh_quotient(r, qq));
  const auto lam = dense_eigenvalues(r);
  // Cauchy: lam_i <= mu_i <= lam_{i + n - k}.
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(mu[i] >= lam[i] - 1e-9);
    CHECK(mu[i] <= lam[i + 15] + 1e-9);
  }
  CHECK(mu.front() >= lam.front() - 1e-9);
  CHECK(mu.back() <= lam.back() + 1e-9);
}

TEST_CASE("small_symmetric_eig: permutation, analytic 2x2, oracle agreement") {
  const auto p = small_symmetric_eig(diag({3, 1, 2}));
  CHECK(p.values == std::vector<double>{1, 2, 3});
  CHECK(std::abs(p.vectors(1, 0)) == 1.0);
  CHECK(std::abs(p.vectors(2, 1)) == 1.0);
  CHECK(std::abs(p.vectors(0, 2)) == 1.0);

  DenseHermitian g(2);
  g.set(0, 1, 1.0);
  const auto t = small_symmetric_eig(g);
  CHECK(t.values[0] == doctest::Approx(-1.0));
  CHECK(t.values[1] == doctest::Approx(1.0));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(t.vectors(0, 0)) == doctest::Approx(s));
  CHECK(t.vectors(0, 0) * t.vectors(1, 0) == doctest::Approx(-0.5));
  CHECK(t.vectors(0, 1) * t.vectors(1, 1) == doctest::Approx(0.5));

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = oracle::random_symmetric(30, 100 + seed);
    const auto e = small_symmetric_eig(r);
    const auto ref = dense_eigenvalues(r);
    for (std::size_t i = 0; i < 30; ++i) CHECK(std::abs(e.values[i] - ref[i]) < 1e-10);
    CHECK(orthonormality_error(e.vectors) < 1e-12);
    // ||G W - W Lambda||_F <= 1e-12 ||G||_F
    const auto gw = matmul_block(r, e.vectors);
    double res = 0.0;
    for (std::size_t j = 0; j < 30; ++j)
      for (std::size_t i = 0; i < 30; ++i) {
        const double d = gw(i, j) - e.values[j] * e.vectors(i, j);
        res += d * d;
      }
    CHECK(std::sqrt(res) <= 1e-12 * r.frobenius());
  }
}

TEST_CASE("dense_eig_oracle: 1D Laplacian formula, identity, magnitude order") {
  const double dx = 1.0 / 6.0;
  const auto a = tridiagonal(5, dx);
  const auto ev = dense_eigenvalues(a);
  std::vector<double> want;
  for (int k = 1; k <= 5; ++k) {
    const double s = std::sin(k * std::numbers::pi / 12.0);
    want.push_back(-4.0 / (dx * dx) * s * s);
  }
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(ev[i] - want[i]) < 1e-10);

  const auto o = dense_eig_oracle(a, 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(o.values[i] - want[4 - i]) < 1e-10);

  const auto id = dense_eig_oracle(DenseHermitian::identity(4), 2);
  CHECK(id.values == std::vector<double>{1.0, 1.0});
  CHECK(orthonormality_error(id.vectors) < 1e-12);

  const auto mag = dense_eig_oracle(diag({-5, 0.1, 3}), 2);
  CHECK(mag.values[0] == doctest::Approx(0.1));
  CHECK(mag.values[1] == doctest::Approx(3.0));

  CHECK_THROWS_AS(dense_eig_oracle(DenseHermitian(kOracleMaxDim + 1), 1), InvalidArgument);
}

TEST_CASE("magnitude ties break by signed value") {
  const auto o = dense_eig_oracle(diag({1, -1, 3, -3}), 4);
  CHECK(o.values == std::vector<double>{-1, 1, -3, 3});
  const std::vector<double> v{2.0, -2.0, 0.5};
  CHECK(magnitude_order(v) == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("oracle spectrum sums to the trace") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto a = oracle::random_symmetric(60, 900 + seed);
    const auto ev = dense_eigenvalues(a);
    double tr = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < 60; ++i) tr += a(i, i);
    for (double x : ev) sum += x;
    CHECK(std::abs(sum - tr) <= 1e-9 * 60 * a.max_abs());
  }
}

TEST_CASE("relative residuals") {
  const auto a = diag({1, 2});
  EigenPairs exact{{1.0}, VectorBlock::identity(2, 1)};
  CHECK(relative_residuals(a, exact)[0] == 0.0);

  EigenPairs wrong{{1.0}, VectorBlock::identity(2, 2).columns(1, 1)};
  CHECK(relative_residuals(a, wrong)[0] == doctest::Approx(0.5));

  // A v = 0: denominator falls back to ||v||.
  EigenPairs zero{{0.25}, VectorBlock::identity(2, 1)};
  CHECK(relative_residuals(diag({0, 2}), zero)[0] == doctest::Approx(0.25));

  const auto r = oracle::random_symmetric(100, 77);
  const auto o = dense_eig_oracle(r, 100);
  for (double x : relative_residuals(r, o)) CHECK(x < 1e-10);
}

}  // TEST_SUITE
