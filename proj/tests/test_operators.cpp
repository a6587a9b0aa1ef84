#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "eigenforge/error.hpp"
#include "eigenforge/operators.hpp"
#include "oracles.hpp"

using namespace eigenforge;

namespace {

ParameterField constant_field(std::size_t p, double v) {
  return ParameterField{p, std::vector<double>(p * p, v), FieldKind::grf, 0};
}

OperatorSpec scalar_spec(Family f, Grid2D g, std::vector<ParameterField> fields) {
  OperatorSpec s;
  s.family = f;
  s.grid = g;
  s.fields = std::move(fields);
  return s;
}

double log_mean(const ParameterField& f) {
  double s = 0.0;
  for (double v : f.values) s += std::log(v);
  return s / static_cast<double>(f.values.size());
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("grid validation and indexing") {
  Grid2D g{3, 2, 1.0, 2.0};
  CHECK(g.size() == 6);
  CHECK(g.index(2, 1) == 5);
  CHECK(g.dx() == doctest::Approx(0.25));
  CHECK(g.dy() == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS((Grid2D{1, 4}).validate(), InvalidArgument);
  CHECK_THROWS_AS((Grid2D{4, 4, 0.0, 1.0}).validate(), InvalidArgument);
}

TEST_CASE("grf: determinism, positivity, smooth limit") {
  const auto a = grf_sample(64, 7, 3.0, 2.0);
  const auto b = grf_sample(64, 7, 3.0, 2.0);
  CHECK(a == b);
  CHECK(a.values.size() == 64 * 64);
  CHECK(std::all_of(a.values.begin(), a.values.end(), [](double v) { return v > 0.0 && std::isfinite(v); }));
  CHECK(grf_sample(64, 8, 3.0, 2.0) != a);

  const auto smooth = grf_sample(32, 3, 3.0, 20.0);
  const auto [lo, hi] = std::minmax_element(smooth.values.begin(), smooth.values.end());
  CHECK(*hi / *lo < 1.05);

  CHECK_THROWS_AS(grf_sample(24, 0, 3.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(grf_sample(2, 0, 3.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(grf_sample(16, 0, 0.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(grf_sample(16, 0, 3.0, 1.0), InvalidArgument);
}

TEST_CASE("grf log-field has zero mean across seeds") {
  std::vector<double> means;
  for (std::uint64_t s = 0; s < 100; ++s) means.push_back(log_mean(grf_sample(32, 1000 + s, 3.0, 2.0)));
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / 100.0;
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  const double se = std::sqrt(var / 99.0 / 100.0);
  CHECK(std::abs(mu) < 3.0 * se);
}

TEST_CASE("wavenumber field spans [0, 10]") {
  const auto k = grf_wavenumber(32, 5, 3.0, 2.0);
  const auto [lo, hi] = std::minmax_element(k.values.begin(), k.values.end());
  CHECK(*lo == doctest::Approx(0.0));
  CHECK(*hi == doctest::Approx(kWavenumberMax));
}

TEST_CASE("elliptic coefficients: constraints, determinism, acceptance rate") {
  std::size_t draws = 0, accepted = 0;
  for (std::uint64_t s = 0; draws < 100000; ++s) {
    const auto c = sample_elliptic_coeffs(s);
    REQUIRE(c.is_elliptic());
    REQUIRE(c.a11 < 0.0);
    REQUIRE(c.a22 < 0.0);
    REQUIRE(std::abs(c.a12) < 0.01);
    for (double v : {c.a11, c.a22, c.a1, c.a2, c.a0}) REQUIRE(std::abs(v) < 1.0);
    draws += c.attempts;
    ++accepted;
  }
  const double rate = static_cast<double>(accepted) / static_cast<double>(draws);
  CHECK(rate == doctest::Approx(0.25).epsilon(0.04));

  const auto x = sample_elliptic_coeffs(42), y = sample_elliptic_coeffs(42);
  CHECK(x.as_array() == y.as_array());

  const auto f = broadcast_coeffs(x, 42);
  CHECK(f.p == kTupleFieldSide);
  CHECK(f.kind == FieldKind::constant_tuple);
  for (std::size_t i = 0; i < 6; ++i) CHECK(f.values[i] == x.as_array()[i]);
  for (std::size_t i = 6; i < f.values.size(); ++i) CHECK(f.values[i] == 0.0);
}

TEST_CASE("poisson with unit K reproduces the 2x2 stencil exactly") {
  const Grid2D g{2, 2, 3.0, 3.0};
  const auto d = discretize(scalar_spec(Family::poisson, g, {constant_field(2, 1.0)}));
  const double stencil[4][4] = {{-4, 1, 1, 0}, {1, -4, 0, 1}, {1, 0, -4, 1}, {0, 1, 1, -4}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(-d.matrix(i, j) == stencil[i][j]);
  CHECK_FALSE(d.symmetrized);
}

TEST_CASE("poisson with unit K has the analytic Dirichlet spectrum") {
  for (std::size_t nx : {6, 12}) {
    const Grid2D g{nx, nx, 1.0, 1.0};
    const auto d = discretize(scalar_spec(Family::poisson, g, {constant_field(16, 1.0)}));
    auto want = oracle::laplacian_spectrum(nx, nx, 1.0, 1.0);
    std::sort(want.begin(), want.end());
    const auto got = dense_eigenvalues(d.matrix);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9 * want[i]);
  }
  // Rectangular grid and domain.
  const Grid2D g{5, 7, 2.0, 1.5};
  auto want = oracle::laplacian_spectrum(5, 7, 2.0, 1.5);
  std::sort(want.begin(), want.end());
  const auto got = dense_eigenvalues(laplacian(g));
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9 * want[i]);
}

TEST_CASE("vibration with unit fields is the squared Laplacian") {
  const Grid2D g{6, 6, 1.0, 1.0};
  const auto d = discretize(scalar_spec(Family::vibration, g, {constant_field(8, 1.0), constant_field(8, 1.0)}));
  auto want = dense_eigenvalues(laplacian(g));
  for (auto& v : want) v *= v;
  std::sort(want.begin(), want.end());
  const auto got = dense_eigenvalues(d.matrix);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9 * want.back());
}

TEST_CASE("vibration standard form matches the generalized pencil") {
  const Grid2D g{5, 6, 1.0, 1.0};
  const auto spec = make_spec(Family::vibration, g, 17);
  const auto d = discretize(spec);
  const std::size_t n = g.size();
  const auto lap = laplacian(g);
  const auto rig = resample_to_grid(spec.fields[0], g);
  Eigen::MatrixXd l(n, n), bih(n, n), mass = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) l(i, j) = lap(i, j);
  bih = l * Eigen::VectorXd::Map(rig.data(), n).asDiagonal() * l;
  for (std::size_t i = 0; i < n; ++i) mass(i, i) = d.mass[i];
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> pencil(bih, mass);
  const auto got = dense_eigenvalues(d.matrix);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - pencil.eigenvalues()(i)) <= 1e-9 * std::abs(pencil.eigenvalues()(i)));
  CHECK(std::all_of(d.mass.begin(), d.mass.end(), [](double m) { return m > 0.0; }));
}

TEST_CASE("helmholtz is the negated diffusion plus k squared") {
  const Grid2D g{4, 4, 1.0, 1.0};
  const auto spec = make_spec(Family::helmholtz, g, 3);
  const auto d = discretize(spec);
  const auto diff = flux_diffusion(g, resample_to_grid(spec.fields[0], g));
  const auto k = resample_to_grid(spec.fields[1], g);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      const double want = -diff(i, j) + (i == j ? k[i] * k[i] : 0.0);
      CHECK(std::abs(d.matrix(i, j) - want) <= 1e-14 * d.matrix.max_abs());
    }
}

TEST_CASE("elliptic operator is symmetrized and flagged") {
  const Grid2D g{6, 5, 1.0, 1.0};
  const auto spec = make_spec(Family::elliptic, g, 9);
  REQUIRE(spec.coeffs);
  const auto d = discretize(spec);
  CHECK(d.symmetrized);
  const auto& c = *spec.coeffs;
  // The drift terms are the whole antisymmetric part.
  const double dx = g.dx(), dy = g.dy();
  const double horiz = 2.0 * std::abs(c.a1) / (2.0 * dx), vert = 2.0 * std::abs(c.a2) / (2.0 * dy);
  const double want = std::sqrt(2.0 * ((5 * 5) * horiz * horiz + (6 * 4) * vert * vert));
  CHECK(d.asymmetry_norm == doctest::Approx(want).epsilon(1e-12));
  CHECK(d.matrix(0, 0) == doctest::Approx(-2 * c.a11 / (dx * dx) - 2 * c.a22 / (dy * dy) + c.a0));

  OperatorSpec bad = spec;
  bad.coeffs->a11 = 0.5;
  CHECK_THROWS_AS(discretize(bad), InvalidArgument);
}

TEST_CASE("non-positive coefficients are rejected") {
  const Grid2D g{4, 4, 1.0, 1.0};
  CHECK_THROWS_AS(discretize(scalar_spec(Family::poisson, g, {constant_field(4, -1.0)})), InvalidArgument);
  CHECK_THROWS_AS(discretize(scalar_spec(Family::vibration, g, {constant_field(4, 1.0), constant_field(4, 0.0)})),
                  InvalidArgument);
  CHECK_THROWS_AS(discretize(scalar_spec(Family::poisson, Grid2D{1, 4}, {constant_field(4, 1.0)})), InvalidArgument);
}

TEST_CASE("resampling reproduces the field when p == nx") {
  const auto f = grf_sample(8, 2, 3.0, 2.0);
  CHECK(resample_to_grid(f, Grid2D{8, 8}) == f.values);
  const auto coarse = resample_to_grid(f, Grid2D{15, 15});
  CHECK(coarse[0] == f.values[0]);
  CHECK(coarse[14] == f.values[7]);
  CHECK(coarse[2 * 15 + 2] == f.values[1 * 8 + 1]);
}

TEST_CASE("diffusion part is positive semidefinite") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Grid2D g{9, 9, 1.0, 1.0};
    const auto spec = make_spec(Family::poisson, g, s);
    const auto d = discretize(spec);
    CHECK(dense_eigenvalues(d.matrix).front() > -1e-9 * d.matrix.max_abs());
  }
}

TEST_CASE("smallest eigenvalue converges to 2 pi^2 under refinement") {
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  std::vector<double> err;
  for (std::size_t nx : {10, 20, 40}) {
    const auto lmin = dense_eig_oracle(laplacian(Grid2D{nx, nx}), 1).values[0];
    err.push_back(std::abs(lmin - exact));
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
  // error ratio per halving of dx: first order or better (>= 2x).
  CHECK(err[0] / err[1] > 2.0);
  CHECK(err[1] / err[2] > 2.0);
}

TEST_CASE("generate_problem_set: determinism, seeds, definiteness") {
  const Grid2D g{20, 20};
  const auto one = generate_problem_set(Family::poisson, 1, g, 3);
  REQUIRE(one.size() == 1);
  CHECK(one[0].seed == 3);
  CHECK(one[0].matrix().n() == 400);

  const auto a = generate_problem_set(Family::helmholtz, 3, Grid2D{8, 8}, 11);
  const auto b = generate_problem_set(Family::helmholtz, 3, Grid2D{8, 8}, 11);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].matrix() == b[i].matrix());
    CHECK(a[i].seed == 11 + i);
    CHECK(a[i].id == i);
  }

  const auto lazy = generate_problem_set(Family::poisson, 2, g, 0, {}, 0, false);
  CHECK(lazy[0].matrix().n() == 0);
  CHECK(discretize(lazy[1].spec).matrix == generate_problem_set(Family::poisson, 2, g, 0)[1].matrix());

  const auto set = generate_problem_set(Family::poisson, 50, g, 0);
  for (const auto& p : set) {
    CHECK(dense_eigenvalues(p.matrix()).front() > 0.0);
    for (std::size_t i = 0; i < 400; i += 37)
      for (std::size_t j = 0; j < 400; j += 11) REQUIRE(p.matrix()(i, j) == p.matrix()(j, i));
  }
  CHECK_THROWS_AS(generate_problem_set(Family::poisson, 0, g, 0), InvalidArgument);
}

TEST_CASE("family and kind names round-trip") {
  for (Family f : {Family::poisson, Family::elliptic, Family::helmholtz, Family::vibration})
    CHECK(parse_family(to_string(f)) == f);
  CHECK_THROWS_AS(parse_family("maxwell"), InvalidArgument);
  CHECK(parse_field_kind(to_string(FieldKind::constant_tuple)) == FieldKind::constant_tuple);
}

}  // TEST_SUITE
