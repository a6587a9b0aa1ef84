#include "eigenforge/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eigenforge/error.hpp"
#include "eigenforge/fft.hpp"
#include "eigenforge/random.hpp"

namespace eigenforge {

namespace {

constexpr std::uint64_t kWavenumberTag = 1;
constexpr std::uint64_t kDensityTag = 2;

void require_positive(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw InvalidArgument(std::string(what) + " must be finite and > 0 (found " +
                            std::to_string(v) + ")");
    }
  }
}

void validate_grf_args(std::size_t p, double tau, double alpha) {
  if (p < 4 || !is_power_of_two(p)) {
    throw InvalidArgument("grf: side " + std::to_string(p) + " must be a power of two >= 4");
  }
  if (!(tau > 0.0)) throw InvalidArgument("grf: tau must be > 0");
  if (!(alpha > 1.0)) throw InvalidArgument("grf: alpha must be > 1");
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::poisson: return "poisson";
    case Family::elliptic: return "elliptic";
    case Family::helmholtz: return "helmholtz";
    case Family::vibration: return "vibration";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::poisson, Family::elliptic, Family::helmholtz, Family::vibration}) {
    if (to_string(f) == name) return f;
  }
  throw InvalidArgument("unknown operator family '" + std::string(name) + "'");
}

std::string_view to_string(FieldKind kind) {
  return kind == FieldKind::grf ? "grf" : "constant-tuple";
}

FieldKind parse_field_kind(std::string_view name) {
  if (name == "grf") return FieldKind::grf;
  if (name == "constant-tuple") return FieldKind::constant_tuple;
  throw InvalidArgument("unknown field kind '" + std::string(name) + "'");
}

void Grid2D::validate() const {
  if (nx < 2 || ny < 2) {
    throw InvalidArgument("grid must have at least 2x2 interior points (got " +
                          std::to_string(nx) + "x" + std::to_string(ny) + ")");
  }
  if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidArgument("grid side lengths must be > 0");
}

// ---------------------------------------------------------------------------
// Random fields

std::vector<double> grf_raw(std::size_t p, std::uint64_t seed, double tau, double alpha) {
  validate_grf_args(p, tau, alpha);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> noise(p * p);
  for (double& x : noise) x = normal(rng);

  // The transform of real white noise is i.i.d. Gaussian with Hermitian
  // symmetry; the radial scaling preserves that symmetry.
  Spectrum2D s = fft2d(noise, p);
  const double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
  for (std::size_t r = 0; r < p; ++r) {
    const auto ky = static_cast<double>(signed_frequency(r, p));
    for (std::size_t c = 0; c < p; ++c) {
      const auto kx = static_cast<double>(signed_frequency(c, p));
      s.at(r, c) *= std::pow(two_pi_sq * (kx * kx + ky * ky) + tau * tau, -0.5 * alpha);
    }
  }
  const Spectrum2D back = ifft2d(s);
  std::vector<double> g(p * p);
  const double inv = 1.0 / static_cast<double>(p * p);
  for (std::size_t i = 0; i < p * p; ++i) g[i] = back.values[i].real() * inv;
  return g;
}

ParameterField grf_sample(std::size_t p, std::uint64_t seed, double tau, double alpha) {
  std::vector<double> g = grf_raw(p, seed, tau, alpha);
  double sq = 0.0;
  for (double x : g) sq += x * x;
  const double rms = std::sqrt(sq / static_cast<double>(g.size()));
  if (!(rms > 0.0) || !std::isfinite(rms)) throw InvalidArgument("grf_sample: degenerate field");
  for (double& x : g) x = std::exp(kGrfLogStd * x / rms);
  return ParameterField{p, std::move(g), FieldKind::grf, seed};
}

ParameterField grf_wavenumber(std::size_t p, std::uint64_t seed, double tau, double alpha) {
  std::vector<double> g = grf_raw(p, seed, tau, alpha);
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& x : g) x = range > 0.0 ? kWavenumberMax * (x - min) / range : 0.5 * kWavenumberMax;
  return ParameterField{p, std::move(g), FieldKind::grf, seed};
}

EllipticCoeffs EllipticCoeffs::from_array(const std::array<double, 6>& c) {
  EllipticCoeffs e;
  e.a11 = c[0];
  e.a12 = c[1];
  e.a22 = c[2];
  e.a1 = c[3];
  e.a2 = c[4];
  e.a0 = c[5];
  return e;
}

EllipticCoeffs sample_elliptic_coeffs(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coupling(-0.01, 0.01);
  EllipticCoeffs c;
  for (std::size_t attempt = 1;; ++attempt) {
    c.a11 = unit(rng);
    c.a22 = unit(rng);
    c.a1 = unit(rng);
    c.a2 = unit(rng);
    c.a0 = unit(rng);
    c.a12 = coupling(rng);
    if (c.is_elliptic() && c.a11 < 0.0 && c.a22 < 0.0) {
      c.attempts = attempt;
      return c;
    }
  }
}

ParameterField broadcast_coeffs(const EllipticCoeffs& c, std::uint64_t seed) {
  ParameterField f{kTupleFieldSide, std::vector<double>(kTupleFieldSide * kTupleFieldSide, 0.0),
                   FieldKind::constant_tuple, seed};
  const auto arr = c.as_array();
  std::copy(arr.begin(), arr.end(), f.values.begin());
  return f;
}

// ---------------------------------------------------------------------------
// Assembly

std::vector<double> resample_to_grid(const ParameterField& field, const Grid2D& grid) {
  grid.validate();
  const std::size_t p = field.p;
  if (p < 2 || field.values.size() != p * p) throw InvalidArgument("resample: malformed field");
  std::vector<double> out(grid.size());
  auto locate = [p](std::size_t i, std::size_t count, std::size_t& i0, double& t) {
    const double u = static_cast<double>(i * (p - 1)) / static_cast<double>(count - 1);
    i0 = std::min(static_cast<std::size_t>(u), p - 2);
    t = u - static_cast<double>(i0);
  };
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    std::size_t r0;
    double ty;
    locate(iy, grid.ny, r0, ty);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      std::size_t c0;
      double tx;
      locate(ix, grid.nx, c0, tx);
      const double top = (1.0 - tx) * field.at(r0, c0) + tx * field.at(r0, c0 + 1);
      const double bottom = (1.0 - tx) * field.at(r0 + 1, c0) + tx * field.at(r0 + 1, c0 + 1);
      out[grid.index(ix, iy)] = (1.0 - ty) * top + ty * bottom;
    }
  }
  return out;
}

DenseHermitian flux_diffusion(const Grid2D& grid, std::span<const double> node_k) {
  grid.validate();
  if (node_k.size() != grid.size()) throw DimensionMismatch("flux_diffusion: coefficient size");
  const double wx = 1.0 / (grid.dx() * grid.dx());
  const double wy = 1.0 / (grid.dy() * grid.dy());
  DenseHermitian a(grid.size());
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const std::size_t p = grid.index(ix, iy);
      const double kp = node_k[p];
      // west / south boundary faces
      if (ix == 0) a.add(p, p, kp * wx);
      if (iy == 0) a.add(p, p, kp * wy);
      // east face
      if (ix + 1 < grid.nx) {
        const std::size_t e = grid.index(ix + 1, iy);
        const double c = 0.5 * (kp + node_k[e]) * wx;
        a.add(p, p, c);
        a.add(e, e, c);
        a.set(p, e, -c);
      } else {
        a.add(p, p, kp * wx);
      }
      // north face
      if (iy + 1 < grid.ny) {
        const std::size_t nb = grid.index(ix, iy + 1);
        const double c = 0.5 * (kp + node_k[nb]) * wy;
        a.add(p, p, c);
        a.add(nb, nb, c);
        a.set(p, nb, -c);
      } else {
        a.add(p, p, kp * wy);
      }
    }
  }
  return a;
}

DenseHermitian laplacian(const Grid2D& grid) {
  return flux_diffusion(grid, std::vector<double>(grid.size(), 1.0));
}

namespace {

void expect_fields(const OperatorSpec& spec, std::size_t count) {
  if (spec.fields.size() != count) {
    throw InvalidArgument(std::string(to_string(spec.family)) + " expects " +
                          std::to_string(count) + " coefficient field(s)");
  }
}

double asymmetry(std::size_t n, std::span<const double> m) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = m[i * n + j] - m[j * n + i];
      s += d * d;
    }
  return std::sqrt(s);
}

Discretization discretize_elliptic(const OperatorSpec& spec) {
  if (!spec.coeffs) throw InvalidArgument("elliptic operator needs a coefficient tuple");
  const EllipticCoeffs& c = *spec.coeffs;
  if (!c.is_elliptic()) throw InvalidArgument("coefficients violate 4 a11 a22 > a12^2");
  if (!(c.a11 < 0.0) || !(c.a22 < 0.0)) throw InvalidArgument("elliptic family requires a11, a22 < 0");
  const Grid2D& g = spec.grid;
  const std::size_t n = g.size();
  const double dx = g.dx(), dy = g.dy();
  std::vector<double> m(n * n, 0.0);
  auto put = [&](std::size_t row, long ix, long iy, double v) {
    if (ix < 0 || iy < 0 || ix >= static_cast<long>(g.nx) || iy >= static_cast<long>(g.ny)) return;
    m[row * n + g.index(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy))] += v;
  };
  const double cxx = c.a11 / (dx * dx);
  const double cyy = c.a22 / (dy * dy);
  const double cxy = c.a12 / (4.0 * dx * dy);
  const double cx = c.a1 / (2.0 * dx);
  const double cy = c.a2 / (2.0 * dy);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const std::size_t row = g.index(ix, iy);
      const long x = static_cast<long>(ix), y = static_cast<long>(iy);
      put(row, x, y, -2.0 * cxx - 2.0 * cyy + c.a0);
      put(row, x + 1, y, cxx + cx);
      put(row, x - 1, y, cxx - cx);
      put(row, x, y + 1, cyy + cy);
      put(row, x, y - 1, cyy - cy);
      put(row, x + 1, y + 1, cxy);
      put(row, x - 1, y - 1, cxy);
      put(row, x + 1, y - 1, -cxy);
      put(row, x - 1, y + 1, -cxy);
    }
  }
  Discretization d;
  d.asymmetry_norm = asymmetry(n, m);
  d.matrix = DenseHermitian::from_row_major(n, m);
  d.symmetrized = true;
  return d;
}

Discretization discretize_vibration(const OperatorSpec& spec) {
  expect_fields(spec, 2);
  const Grid2D& g = spec.grid;
  const std::vector<double> rigidity = resample_to_grid(spec.fields[0], g);
  const std::vector<double> density = resample_to_grid(spec.fields[1], g);
  require_positive(rigidity, "rigidity D");
  require_positive(density, "density rho");
  const DenseHermitian lap = laplacian(g);
  const std::size_t n = g.size();

  // Sparse neighbour lists of the five-point operator.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ix = i % g.nx, iy = i / g.nx;
    rows[i].emplace_back(i, lap(i, i));
    if (ix > 0) rows[i].emplace_back(i - 1, lap(i, i - 1));
    if (ix + 1 < g.nx) rows[i].emplace_back(i + 1, lap(i, i + 1));
    if (iy > 0) rows[i].emplace_back(i - g.nx, lap(i, i - g.nx));
    if (iy + 1 < g.ny) rows[i].emplace_back(i + g.nx, lap(i, i + g.nx));
  }
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [k, lik] : rows[i])
      for (const auto& [j, lkj] : rows[k]) m[i * n + j] += lik * rigidity[k] * lkj;

  Discretization d;
  d.asymmetry_norm = asymmetry(n, m);
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = 1.0 / std::sqrt(density[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] *= scale[i] * scale[j];
  d.matrix = DenseHermitian::from_row_major(n, m);
  d.mass = density;
  return d;
}

}  // namespace

Discretization discretize(const OperatorSpec& spec) {
  spec.grid.validate();
  switch (spec.family) {
    case Family::poisson: {
      expect_fields(spec, 1);
      const auto k = resample_to_grid(spec.fields[0], spec.grid);
      require_positive(k, "diffusion K");
      return Discretization{flux_diffusion(spec.grid, k), {}, false, 0.0};
    }
    case Family::helmholtz: {
      expect_fields(spec, 2);
      const auto p = resample_to_grid(spec.fields[0], spec.grid);
      require_positive(p, "coefficient p");
      const auto k = resample_to_grid(spec.fields[1], spec.grid);
      const DenseHermitian diffusion = flux_diffusion(spec.grid, p);
      const std::size_t n = spec.grid.size();
      std::vector<double> buf(n * n);
      for (std::size_t i = 0; i < n * n; ++i) buf[i] = -diffusion.data()[i];
      for (std::size_t i = 0; i < n; ++i) buf[i * n + i] += k[i] * k[i];
      return Discretization{DenseHermitian::from_row_major(n, buf), {}, false, 0.0};
    }
    case Family::elliptic: return discretize_elliptic(spec);
    case Family::vibration: return discretize_vibration(spec);
  }
  throw InvalidArgument("discretize: unknown family");
}

std::size_t default_field_side(const Grid2D& grid) {
  std::size_t p = 4;
  while (p < std::max(grid.nx, grid.ny)) p <<= 1;
  return p;
}

OperatorSpec make_spec(Family family, const Grid2D& grid, std::uint64_t seed, const GrfParams& grf,
                       std::size_t field_side) {
  grid.validate();
  const std::size_t p = field_side ? field_side : default_field_side(grid);
  OperatorSpec spec;
  spec.family = family;
  spec.grid = grid;
  switch (family) {
    case Family::poisson:
      spec.fields.push_back(grf_sample(p, seed, grf.tau, grf.alpha));
      break;
    case Family::helmholtz:
      spec.fields.push_back(grf_sample(p, seed, grf.tau, grf.alpha));
      spec.fields.push_back(grf_wavenumber(p, derive_seed(seed, kWavenumberTag), grf.tau, grf.alpha));
      break;
    case Family::vibration:
      spec.fields.push_back(grf_sample(p, seed, grf.tau, grf.alpha));
      spec.fields.push_back(grf_sample(p, derive_seed(seed, kDensityTag), grf.tau, grf.alpha));
      break;
    case Family::elliptic: {
      const EllipticCoeffs c = sample_elliptic_coeffs(seed);
      spec.coeffs = c;
      spec.fields.push_back(broadcast_coeffs(c, seed));
      break;
    }
  }
  return spec;
}

std::vector<Problem> generate_problem_set(Family family, std::size_t count, const Grid2D& grid,
                                          std::uint64_t master_seed, const GrfParams& grf,
                                          std::size_t field_side, bool assemble) {
  if (count == 0) throw InvalidArgument("generate_problem_set: N must be >= 1");
  std::vector<Problem> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Problem prob;
    prob.id = i;
    prob.seed = master_seed + i;
    prob.spec = make_spec(family, grid, prob.seed, grf, field_side);
    if (assemble) prob.disc = discretize(prob.spec);
    out.push_back(std::move(prob));
  }
  return out;
}

}  // namespace eigenforge
