#include "eigenforge/chebyshev.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "eigenforge/error.hpp"

namespace eigenforge {

FilterParams::FilterParams(int degree, double lambda, double center, double half_width)
    : degree_(degree), lambda_(lambda), center_(center), half_width_(half_width) {
  if (degree < 1) throw InvalidArgument("FilterParams: degree must be >= 1");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("FilterParams: half-width must be finite and > 0");
  }
  if (!std::isfinite(lambda) || !std::isfinite(center)) throw InvalidArgument("FilterParams: non-finite input");
  if (std::abs(lambda - center) <= half_width) {
    throw InvalidArgument("FilterParams: lambda = " + std::to_string(lambda) +
                          " lies inside the damped interval [" + std::to_string(center - half_width) +
                          ", " + std::to_string(center + half_width) + "]");
  }
}

FilterParams FilterParams::from_interval(int degree, double lambda, double alpha, double beta) {
  return FilterParams(degree, lambda, 0.5 * (alpha + beta), 0.5 * (beta - alpha));
}

VectorBlock chebyshev_filter(const DenseHermitian& a, const VectorBlock& y0, const FilterParams& params,
                             MatvecCounter* counter, FilterOperator op) {
  if (y0.n() != a.n()) throw DimensionMismatch("chebyshev_filter: block rows do not match A");
  const auto n = static_cast<Eigen::Index>(a.n());
  const auto k = static_cast<Eigen::Index>(y0.k());
  if (k == 0) return y0;
  const Eigen::Map<const Eigen::MatrixXd> amat(a.data().data(), n, n);
  const std::size_t products = op == FilterOperator::squared ? 2 : 1;

  Eigen::MatrixXd scratch(n, k);
  auto apply = [&](const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
    if (op == FilterOperator::squared) {
      scratch.noalias() = amat * x;
      out.noalias() = amat * scratch;
    } else {
      out.noalias() = amat * x;
    }
    if (counter) counter->count += products * y0.k();
  };

  const double c = params.center();
  const double e = params.half_width();
  const double sigma1 = e / (params.lambda() - c);

  Eigen::MatrixXd prev = Eigen::Map<const Eigen::MatrixXd>(y0.data().data(), n, k);
  Eigen::MatrixXd cur(n, k);
  Eigen::MatrixXd next(n, k);
  apply(prev, cur);
  cur = (sigma1 / e) * (cur - c * prev);

  double sigma = sigma1;
  for (int i = 1; i < params.degree(); ++i) {
    const double sigma_next = 1.0 / (2.0 / sigma1 - sigma);
    apply(cur, next);
    next = (2.0 * sigma_next / e) * (next - c * cur) - (sigma * sigma_next) * prev;
    std::swap(prev, cur);
    std::swap(cur, next);
    sigma = sigma_next;
  }

  VectorBlock out(y0.n(), y0.k());
  Eigen::Map<Eigen::MatrixXd>(out.data().data(), n, k) = cur;
  return out;
}

double filter_polynomial(double x, const FilterParams& params) {
  const double c = params.center();
  const double e = params.half_width();
  const double t = (x - c) / e;
  const double sigma1 = e / (params.lambda() - c);
  double prev = 1.0;
  double cur = sigma1 * t;
  double sigma = sigma1;
  for (int i = 1; i < params.degree(); ++i) {
    const double sigma_next = 1.0 / (2.0 / sigma1 - sigma);
    const double next = 2.0 * sigma_next * t * cur - sigma * sigma_next * prev;
    prev = cur;
    cur = next;
    sigma = sigma_next;
  }
  return cur;
}

FilterParams build_filter_params(std::span<const double> prior_values, double upper_bound, int m) {
  if (prior_values.size() < 2) throw InvalidArgument("build_filter_params: need at least 2 prior values");
  const auto [lo, hi] = std::minmax_element(prior_values.begin(), prior_values.end());
  const double lambda = *lo;
  const double alpha = *hi + kIntervalMargin * (*hi - *lo);
  const double beta = upper_bound + kIntervalMargin * std::abs(upper_bound);
  if (!(upper_bound > alpha)) {
    throw InvalidArgument("build_filter_params: upper bound " + std::to_string(upper_bound) +
                          " does not exceed alpha " + std::to_string(alpha) + " (empty damping interval)");
  }
  return FilterParams::from_interval(m, lambda, alpha, beta);
}

SpectralBounds estimate_spectral_bounds(const DenseHermitian& a, std::size_t k, std::uint64_t seed,
                                        MatvecCounter* counter) {
  const std::size_t n = a.n();
  if (k < 4 && k < n) throw InvalidArgument("estimate_upper_bound: need k >= 4 Lanczos steps");
  const std::size_t steps = std::min(k, n);

  Rng rng(seed);
  VectorBlock basis = VectorBlock::gaussian(n, 1, rng);
  {
    const double nrm = norm2(basis.col(0));
    for (double& x : basis.col(0)) x /= nrm;
  }
  VectorBlock v(n, steps);
  std::copy(basis.col(0).begin(), basis.col(0).end(), v.col(0).begin());

  std::vector<double> alpha, beta;
  double scale = 0.0;
  bool exhausted = false;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < steps; ++j) {
    const auto vj = v.col(j);
    for (std::size_t i = 0; i < n; ++i) w[i] = dot(std::span<const double>(a.data().data() + i * n, n), vj);
    if (counter) counter->count += 1;
    const double aj = dot(vj, w);
    alpha.push_back(aj);
    // Full reorthogonalization, twice.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t r = 0; r <= j; ++r) {
        const auto vr = v.col(r);
        const double h = dot(vr, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= h * vr[i];
      }
    }
    const double bj = norm2(w);
    beta.push_back(bj);
    scale = std::max({scale, std::abs(aj), bj});
    if (bj <= 1e-12 * scale || bj == 0.0) {
      exhausted = true;
      break;
    }
    if (j + 1 < steps) {
      auto next = v.col(j + 1);
      for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / bj;
    }
  }

  const std::size_t m = alpha.size();
  DenseHermitian t(m);
  for (std::size_t i = 0; i < m; ++i) {
    t.set(i, i, alpha[i]);
    if (i + 1 < m) t.set(i, i + 1, beta[i]);
  }
  const EigenPairs ritz = small_symmetric_eig(t);
  SpectralBounds b;
  b.ritz_min = ritz.values.front();
  b.ritz_max = ritz.values.back();
  b.exhausted = exhausted || m == n;
  if (b.exhausted) {
    b.lower = b.ritz_min;
    b.upper = b.ritz_max;
  } else {
    const double last_beta = beta.back();
    b.upper = b.ritz_max + last_beta * std::sqrt(std::abs(ritz.vectors(m - 1, m - 1)));
    b.lower = b.ritz_min - last_beta * std::sqrt(std::abs(ritz.vectors(m - 1, 0)));
  }
  return b;
}

double estimate_upper_bound(const DenseHermitian& a, std::size_t k, std::uint64_t seed, MatvecCounter* counter) {
  return estimate_spectral_bounds(a, k, seed, counter).upper;
}

}  // namespace eigenforge
