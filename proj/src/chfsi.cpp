#include "eigenforge/chfsi.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace eigenforge {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kLanczosTag = 0x1a2c05;
constexpr std::uint64_t kPadTag = 0x9add;
constexpr std::uint64_t kQrTag = 0x0e7d;
constexpr double kWarmOrthoTolerance = 1e-8;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

Eigen::Map<const Eigen::MatrixXd> view(const VectorBlock& y) {
  return {y.data().data(), static_cast<Eigen::Index>(y.n()), static_cast<Eigen::Index>(y.k())};
}

/// X * S for a small k x k rotation S.
VectorBlock rotate(const VectorBlock& x, const VectorBlock& s) {
  VectorBlock out(x.n(), s.k());
  Eigen::Map<Eigen::MatrixXd>(out.data().data(), static_cast<Eigen::Index>(x.n()),
                              static_cast<Eigen::Index>(s.k())).noalias() = view(x) * view(s);
  return out;
}

void normalize_columns(VectorBlock& y) {
  for (std::size_t j = 0; j < y.k(); ++j) {
    auto c = y.col(j);
    const double nrm = norm2(c);
    if (nrm > 0.0 && std::isfinite(nrm)) {
      for (double& x : c) x /= nrm;
    }
  }
}

/// `base` followed by random columns, orthonormal, `base` columns kept verbatim
/// when they are already orthonormal.
VectorBlock complete_basis(const VectorBlock& base, std::size_t width, std::uint64_t seed) {
  const std::size_t n = base.n();
  VectorBlock y = base;
  if (y.k() > width) y = y.columns(0, width);
  if (y.k() < width) {
    Rng rng(seed);
    y = y.append(VectorBlock::gaussian(n, width - y.k(), rng));
  }
  const std::size_t keep = std::min(base.k(), width);
  const bool base_ok = keep == 0 || orthonormality_error(y.columns(0, keep)) <= kWarmOrthoTolerance;
  if (keep == width && base_ok) return y;
  VectorBlock q = qr_orthonormalize(y, seed).q;
  if (base_ok) {
    for (std::size_t j = 0; j < keep; ++j) {
      std::copy(y.col(j).begin(), y.col(j).end(), q.col(j).begin());
    }
  }
  return q;
}

/// Damped interval for the current unlocked Ritz values. The plain edge
/// filters damp everything beyond the block on the far side; the squared
/// filter does the same for A^2. Degenerate windows are widened instead of
/// rejected so the solver never aborts on interval construction.
struct EdgeFilter {
  FilterParams params;
  FilterOperator op;
};

EdgeFilter edge_filter(FilterEdge edge, std::span<const double> theta, const SpectralBounds& b, int m) {
  std::vector<double> v(theta.begin(), theta.end());
  double upper = b.upper;
  double lower = b.lower;
  double sign = 1.0;
  if (edge == FilterEdge::top) {
    sign = -1.0;
    for (double& x : v) x = -x;
    upper = -b.lower;
    lower = -b.upper;
  } else if (edge == FilterEdge::squared) {
    for (double& x : v) x = x * x;
    upper = std::max(b.lower * b.lower, b.upper * b.upper);
    lower = 0.0;
  }
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double scale = std::max({upper - lower, std::abs(hi), std::abs(lo), 1e-300});
  double width = hi - lo;
  if (width < 1e-6 * scale) width = 1e-6 * scale;
  const double alpha = hi + kIntervalMargin * width;
  double beta = upper + kIntervalMargin * std::abs(upper);
  if (beta < alpha + 1e-3 * scale) beta = alpha + std::max(width, 1e-3 * scale);
  const double c = 0.5 * (alpha + beta);
  const double e = 0.5 * (beta - alpha);
  return {FilterParams(m, sign * lo, sign * c, e),
          edge == FilterEdge::squared ? FilterOperator::squared : FilterOperator::plain};
}

struct LockedSet {
  VectorBlock vectors;
  std::vector<double> values;
  std::vector<double> residuals;
};

/// Locked pairs plus the first unlocked ones, sorted by magnitude.
void fill_record_pairs(SolveRecord& rec, const DenseHermitian& a, const LockedSet& locked,
                       const EigenPairs& remaining, std::size_t L) {
  std::vector<double> values = locked.values;
  std::vector<double> res = locked.residuals;
  VectorBlock vecs = locked.vectors;
  std::vector<std::size_t> take;
  for (std::size_t j = 0; j < remaining.size() && values.size() + take.size() < L; ++j) take.push_back(j);
  if (!take.empty()) {
    vecs = vecs.append(remaining.vectors.select(take));
    for (std::size_t j : take) {
      values.push_back(remaining.values[j]);
      res.push_back(relative_residual(a, remaining.vectors.col(j), remaining.values[j]));
    }
  }
  const auto order = magnitude_order(values);
  rec.pairs.values.clear();
  rec.residuals.clear();
  for (std::size_t i : order) {
    rec.pairs.values.push_back(values[i]);
    rec.residuals.push_back(res[i]);
  }
  rec.pairs.vectors = vecs.select(order);
  rec.worst_residual = rec.residuals.empty() ? 0.0 : *std::max_element(rec.residuals.begin(), rec.residuals.end());
}

}  // namespace

std::size_t default_extra(std::size_t L) { return (2 * L + 9) / 10; }

SolverConfig SolverConfig::for_count(std::size_t L) {
  SolverConfig cfg;
  cfg.L = L;
  cfg.extra = default_extra(L);
  return cfg;
}

void SolverConfig::validate(std::size_t n) const {
  if (L < 1) throw InvalidArgument("SolverConfig: L must be >= 1");
  if (L + extra > n) {
    throw InvalidArgument("SolverConfig: L + extra = " + std::to_string(L + extra) + " exceeds n = " +
                          std::to_string(n));
  }
  if (!(tol > 0.0)) throw InvalidArgument("SolverConfig: tol must be > 0");
  if (m < 1) throw InvalidArgument("SolverConfig: filter degree must be >= 1");
  if (max_iters < 1) throw InvalidArgument("SolverConfig: max_iters must be >= 1");
}

std::string_view to_string(FilterEdge edge) {
  switch (edge) {
    case FilterEdge::bottom: return "bottom";
    case FilterEdge::top: return "top";
    case FilterEdge::squared: return "squared";
  }
  return "?";
}

WarmStart random_warm_start(std::size_t n, std::size_t width, std::uint64_t seed) {
  if (width > n) throw InvalidArgument("random_warm_start: width exceeds n");
  Rng rng(seed);
  WarmStart w;
  w.vectors = qr_orthonormalize(VectorBlock::gaussian(n, width, rng), seed).q;
  w.origin = WarmOrigin::random;
  return w;
}

WarmStart make_warm_start(const SolveRecord& prior, const SolverConfig& cfg) {
  const std::size_t n = prior.pairs.vectors.n();
  if (prior.pairs.size() < cfg.L) throw InvalidArgument("make_warm_start: prior solved fewer than L pairs");
  const std::size_t width = std::min(cfg.width(), n);
  VectorBlock base = prior.pairs.vectors.columns(0, cfg.L);
  WarmStart w;
  w.values.assign(prior.pairs.values.begin(), prior.pairs.values.begin() + static_cast<std::ptrdiff_t>(cfg.L));
  const std::size_t carried = std::min({cfg.extra, prior.retained.size(), width - cfg.L});
  if (carried > 0) {
    base = base.append(prior.retained.vectors.columns(0, carried));
    w.values.insert(w.values.end(), prior.retained.values.begin(),
                    prior.retained.values.begin() + static_cast<std::ptrdiff_t>(carried));
  }
  const double pad_value = w.values.empty() ? 0.0 : w.values.back();
  w.values.resize(width, pad_value);
  w.vectors = complete_basis(base, width, derive_seed(cfg.seed, kPadTag));
  w.origin = WarmOrigin::previous;
  return w;
}

SolveRecord chfsi_solve(const DenseHermitian& a, const WarmStart& warm, const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  const std::size_t n = a.n();
  cfg.validate(n);
  if (warm.vectors.k() > 0 && warm.vectors.n() != n) {
    throw DimensionMismatch("chfsi_solve: warm start has " + std::to_string(warm.vectors.n()) +
                            " rows, matrix has " + std::to_string(n));
  }
  const std::size_t L = cfg.L;
  const std::size_t width = cfg.width();

  MatvecCounter filter_count;
  MatvecCounter rr_count;
  const SpectralBounds bounds =
      estimate_spectral_bounds(a, cfg.lanczos_steps, derive_seed(cfg.seed, kLanczosTag), &filter_count);

  SolveRecord rec;
  rec.edge = std::abs(bounds.lower) <= std::abs(bounds.upper) ? FilterEdge::bottom : FilterEdge::top;

  VectorBlock active = warm.vectors.k() == 0 ? random_warm_start(n, width, cfg.seed).vectors
                                             : complete_basis(warm.vectors, width, derive_seed(cfg.seed, kPadTag));
  LockedSet locked{VectorBlock(n, 0), {}, {}};
  EigenPairs remaining;
  std::size_t window_misses = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  std::size_t last_progress = 0;

  auto finish = [&](const std::string& status) {
    rec.status = status;
    rec.converged = status == "converged";
    rec.matvecs = filter_count.count;
    rec.rr_matvecs = rr_count.count;
    rec.filter_flops_estimate = 2.0 * static_cast<double>(n) * static_cast<double>(n) *
                                static_cast<double>(rec.matvecs);
    fill_record_pairs(rec, a, locked, remaining, L);
    const std::size_t spare = rec.converged ? remaining.size() : 0;
    std::vector<std::size_t> keep(spare);
    for (std::size_t j = 0; j < spare; ++j) keep[j] = j;
    rec.retained.values.assign(remaining.values.begin(), remaining.values.begin() + static_cast<std::ptrdiff_t>(spare));
    rec.retained.vectors = remaining.vectors.select(keep);
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  };

  for (std::size_t iter = 1;; ++iter) {
    rec.iterations = iter;

    // Rayleigh-Ritz on the unlocked block (already orthogonal to locked).
    const VectorBlock aq = matmul_block(a, active, &rr_count);
    const EigenPairs ritz = small_symmetric_eig(rayleigh_quotient_from_product(active, aq));
    const VectorBlock v = rotate(active, ritz.vectors);
    const VectorBlock av = rotate(aq, ritz.vectors);

    const auto order = magnitude_order(ritz.values);
    std::vector<double> fast(ritz.size());
    for (std::size_t j = 0; j < ritz.size(); ++j) {
      double num = 0.0, den = 0.0;
      const auto vc = v.col(j);
      const auto ac = av.col(j);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = ac[i] - ritz.values[j] * vc[i];
        num += r * r;
        den += ac[i] * ac[i];
      }
      fast[j] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num) / std::max(norm2(vc), 1e-300);
    }

    // Contiguous locking in target order, each candidate rechecked exactly.
    std::size_t pos = 0;
    std::size_t newly = 0;
    for (; pos < order.size() && locked.values.size() < L; ++pos) {
      const std::size_t j = order[pos];
      if (!(fast[j] <= cfg.tol)) break;
      const double exact = relative_residual(a, v.col(j), ritz.values[j]);
      rr_count.count += 1;
      if (!(exact <= cfg.tol)) break;
      locked.vectors = locked.vectors.append(v.columns(j, 1));
      locked.values.push_back(ritz.values[j]);
      locked.residuals.push_back(exact);
      ++newly;
    }
    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(pos), order.end());
    remaining.values.clear();
    for (std::size_t j : rest) remaining.values.push_back(ritz.values[j]);
    remaining.vectors = v.select(rest);
    rec.locked_history.push_back(locked.values.size());
    double metric = 0.0;
    for (std::size_t j = 0; j + locked.values.size() < L && j < rest.size(); ++j) {
      metric = std::max(metric, fast[rest[j]]);
    }
    rec.residual_history.push_back(metric);

    if (locked.values.size() >= L) {
      finish("converged");
      return rec;
    }
    if (iter >= cfg.max_iters) {
      finish("max_iters");
      throw SolveFailure("chfsi_solve: max_iters = " + std::to_string(cfg.max_iters) + " reached with " +
                             std::to_string(locked.values.size()) + " of " + std::to_string(L) + " pairs locked",
                         rec);
    }

    if (newly > 0 || metric < 0.5 * best_metric) {
      best_metric = newly > 0 ? metric : std::min(best_metric, metric);
      last_progress = iter;
    }
    if (cfg.stall_iters > 0 && iter - last_progress >= cfg.stall_iters) {
      finish("stalled");
      throw SolveFailure("chfsi_solve: no progress in " + std::to_string(cfg.stall_iters) +
                             " iterations (leading residual " + sci(metric) + ")",
                         rec);
    }

    // Does the wanted window touch the edge being filtered?
    if (rec.edge != FilterEdge::squared && iter >= 2) {
      std::vector<double> all = locked.values;
      all.insert(all.end(), remaining.values.begin(), remaining.values.end());
      const auto mag = magnitude_order(all);
      const double r = std::abs(all[mag[L - 1]]);
      const auto [mn, mx] = std::minmax_element(all.begin(), all.end());
      const bool inside = rec.edge == FilterEdge::bottom ? r <= *mx : -r >= *mn;
      window_misses = inside ? 0 : window_misses + 1;
      if (window_misses >= 2) {
        rec.edge = FilterEdge::squared;
        best_metric = std::numeric_limits<double>::infinity();
        last_progress = iter;
      }
    }

    const EdgeFilter f = edge_filter(rec.edge, remaining.values, bounds, cfg.m);
    VectorBlock y = chebyshev_filter(a, remaining.vectors, f.params, &filter_count, f.op);
    normalize_columns(y);
    const std::size_t nl = locked.values.size();
    VectorBlock q = qr_orthonormalize(locked.vectors.append(y), derive_seed(cfg.seed, kQrTag + iter)).q;
    active = q.columns(nl, width - nl);
  }
}

}  // namespace eigenforge
