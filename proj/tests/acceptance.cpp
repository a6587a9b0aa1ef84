// Acceptance runs. One line per criterion:
//   acceptance                       all criteria
//   acceptance --criterion N         one criterion (exit status = verdict)
//   acceptance --desk-run FILE       compute the shared N = 50 desk benchmark
//   --desk-file FILE                 reuse a stored desk benchmark

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eigenforge/chebyshev.hpp"
#include "eigenforge/chfsi.hpp"
#include "eigenforge/fft.hpp"
#include "eigenforge/fft_sort.hpp"
#include "eigenforge/linalg.hpp"
#include "eigenforge/operators.hpp"
#include "eigenforge/pipeline.hpp"
#include "oracles.hpp"

using namespace eigenforge;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const ProblemResult& by_index(const RunReport& r, std::size_t idx) {
  return *std::find_if(r.results.begin(), r.results.end(), [&](const ProblemResult& x) { return x.index == idx; });
}

std::vector<double> signed_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Shared desk benchmark: N = 50 poisson problems on a 30 x 30 grid, L = 20,
// tol = 1e-10, five master seeds.

constexpr std::size_t kDeskN = 50;
constexpr std::size_t kDeskGrid = 30;
constexpr std::size_t kDeskL = 20;
constexpr double kDeskTol = 1e-10;
constexpr std::size_t kDeskSeeds = 5;

// Modes in desk order; the last one is scsf sorted on the full spectrum.
const char* const kDeskModes[] = {"chfsi-random", "scsf-no-sort", "scsf", "scsf-full-p0"};

json desk_run(std::ostream& log) {
  const Grid2D grid{kDeskGrid, kDeskGrid};
  const std::size_t p = default_field_side(grid);
  json seeds = json::array();
  const auto t0 = Clock::now();
  for (std::size_t s = 0; s < kDeskSeeds; ++s) {
    const std::uint64_t master = s * kDeskN;
    const auto problems = generate_problem_set(Family::poisson, kDeskN, grid, master, {}, 0, false);
    std::vector<RunReport> reports;
    for (int k = 0; k < 4; ++k) {
      RunPlan plan;
      plan.mode = k == 0 ? RunMode::chfsi_random : k == 1 ? RunMode::scsf_no_sort : RunMode::scsf;
      plan.solver = SolverConfig::for_count(kDeskL);
      plan.solver.tol = kDeskTol;
      plan.p0 = k == 3 ? p : 20;
      plan.seed = master;
      reports.push_back(run(problems, plan));
      log << "  seed " << master << " " << kDeskModes[k] << ": mean iterations "
          << fmt("%.2f", reports.back().aggregates.mean_iterations) << ", mean time "
          << fmt("%.4f", reports.back().aggregates.mean_time_with_sort) << " s\n"
          << std::flush;
    }
    // Worst pairwise eigenvalue disagreement between the three solver modes,
    // in units of tol * ||A||_max.
    double worst = 0.0;
    for (std::size_t i = 0; i < kDeskN; ++i) {
      const double scale = kDeskTol * discretize(problems[i].spec).matrix.max_abs();
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          const auto va = signed_sorted(by_index(reports[a], i).record.pairs.values);
          const auto vb = signed_sorted(by_index(reports[b], i).record.pairs.values);
          for (std::size_t j = 0; j < va.size(); ++j) worst = std::max(worst, std::abs(va[j] - vb[j]) / scale);
        }
    }
    json modes = json::object();
    for (int k = 0; k < 4; ++k) {
      const auto& ag = reports[k].aggregates;
      modes[kDeskModes[k]] = json{{"mean_iterations", ag.mean_iterations},
                                  {"mean_time", ag.mean_time_with_sort},
                                  {"mean_solve_time", ag.mean_wall_seconds},
                                  {"sort_seconds", reports[k].sort.total_seconds()},
                                  {"failures", ag.failures}};
    }
    seeds.push_back(json{{"master_seed", master}, {"modes", modes}, {"max_deviation_over_tol", worst}});
  }
  return json{{"N", kDeskN}, {"grid", kDeskGrid}, {"L", kDeskL}, {"tol", kDeskTol}, {"seeds", seeds},
              {"seconds", seconds_since(t0)}};
}

class DeskData {
 public:
  explicit DeskData(std::optional<std::string> file) : file_(std::move(file)) {}

  const json& get(std::ostream& log) {
    if (data_) return *data_;
    if (file_ && std::filesystem::exists(*file_)) {
      std::ifstream f(*file_);
      data_ = json::parse(f);
    } else {
      log << "computing desk benchmark\n";
      data_ = desk_run(log);
    }
    return *data_;
  }

  // Per-seed value of `key` for `mode`.
  std::vector<double> series(std::ostream& log, const std::string& mode, const std::string& key) {
    std::vector<double> out;
    for (const auto& s : get(log)["seeds"]) out.push_back(s["modes"][mode][key].get<double>());
    return out;
  }

 private:
  std::optional<std::string> file_;
  std::optional<json> data_;
};

// ---------------------------------------------------------------------------

Verdict oracle_equivalence(std::ostream& log) {
  const Family families[] = {Family::poisson, Family::elliptic, Family::helmholtz, Family::vibration};
  const std::size_t sides[] = {10, 20, 30};
  const double tols[] = {1e-8, 1e-10, 1e-12};
  constexpr std::size_t kPerGroup = 6;
  std::size_t total = 0, bad = 0, oracle_bad = 0;
  const auto t0 = Clock::now();
  std::ostringstream misses;
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t g = 0; g < 3; ++g)
      for (std::size_t t = 0; t < 3; ++t) {
        const Grid2D grid{sides[g], sides[g]};
        const std::uint64_t master = 100000 * f + 1000 * g + 100 * t;
        const auto problems = generate_problem_set(families[f], kPerGroup, grid, master);
        RunPlan plan;
        plan.mode = RunMode::scsf;
        plan.solver = SolverConfig::for_count(20);
        plan.solver.tol = tols[t];
        plan.seed = master;
        const RunReport report = run(problems, plan);
        std::size_t group_bad = 0;
        for (std::size_t i = 0; i < kPerGroup; ++i) {
          const DenseHermitian& a = problems[i].matrix();
          const auto& res = by_index(report, i);
          const EigenPairs ref = dense_eig_oracle(a, 20);
          const double bound = std::max(1e-8, 10.0 * tols[t]) * a.max_abs();
          const auto got = signed_sorted(res.record.pairs.values);
          const auto want = signed_sorted(ref.values);
          double dev = 0.0;
          for (std::size_t j = 0; j < 20; ++j) dev = std::max(dev, std::abs(got[j] - want[j]));
          const auto r = relative_residuals(a, res.record.pairs);
          const double rmax = *std::max_element(r.begin(), r.end());
          ++total;
          if (res.failed || dev > bound || !(rmax <= tols[t])) {
            ++bad;
            ++group_bad;
            // Residual the oracle's own pairs reach on this matrix.
            const auto ro = relative_residuals(a, ref);
            const double omax = *std::max_element(ro.begin(), ro.end());
            oracle_bad += omax > tols[t];
            misses << "    " << to_string(families[f]) << " n=" << a.n() << " tol=" << fmt("%.0e", tols[t])
                   << " problem " << i << ": " << (res.failed ? res.record.status : "converged")
                   << ", max residual " << fmt("%.2e", rmax) << ", deviation/bound " << fmt("%.2e", dev / bound)
                   << ", oracle pairs' residual " << fmt("%.2e", omax) << "\n";
          }
        }
        log << "  " << to_string(families[f]) << " n=" << grid.size() << " tol=" << fmt("%.0e", tols[t]) << ": "
            << (kPerGroup - group_bad) << "/" << kPerGroup << " ok, mean iterations "
            << fmt("%.1f", report.aggregates.mean_iterations) << "\n"
            << std::flush;
      }
  log << misses.str();
  Verdict v;
  v.pass = bad == 0 && total >= 200;
  v.detail = std::to_string(total - bad) + "/" + std::to_string(total) + " problems match the oracle with residuals <= tol";
  if (bad > 0) {
    v.detail += "; " + std::to_string(oracle_bad) + " of the " + std::to_string(bad) +
                " misses are pairs whose dense-oracle eigenvectors also exceed tol";
  }
  v.detail += " (" + fmt("%.0f", seconds_since(t0)) + " s)";
  return v;
}

Verdict sort_iteration_reduction(DeskData& desk, std::ostream& log) {
  const double sorted = mean(desk.series(log, "scsf", "mean_iterations"));
  const double unsorted = mean(desk.series(log, "scsf-no-sort", "mean_iterations"));
  Verdict v;
  v.pass = sorted <= 0.9 * unsorted;
  v.detail = "mean iterations scsf " + fmt("%.3f", sorted) + " vs scsf-no-sort " + fmt("%.3f", unsorted) + " (ratio " +
             fmt("%.3f", sorted / unsorted) + ", need <= 0.9)";
  return v;
}

// ---------------------------------------------------------------------------
// Perturbation sequences: A_{i+1} = A_i + eps * (||A_i||_F / ||E_i||_F) * E_i with
// E_i an independent flux-form diffusion operator.

struct SequenceStats {
  double mean_iterations = 0.0;
  std::size_t one_iteration = 0;
  std::size_t warm_solves = 0;
  std::size_t failures = 0;
};

SequenceStats perturbation_sequence(double eps, bool independent, std::uint64_t seed) {
  constexpr std::size_t kLength = 16;
  const Grid2D grid{20, 20};
  const auto pool = generate_problem_set(Family::poisson, kLength + 1, grid, seed);
  SolverConfig cfg = SolverConfig::for_count(20);
  cfg.tol = 1e-10;
  std::vector<DenseHermitian> seq;
  seq.push_back(pool[0].matrix());
  for (std::size_t i = 1; i <= kLength; ++i) {
    if (independent) {
      seq.push_back(pool[i].matrix());
      continue;
    }
    const DenseHermitian& prev = seq.back();
    const DenseHermitian& e = pool[i].matrix();
    const double scale = eps * prev.frobenius() / e.frobenius();
    std::vector<double> next(prev.data().begin(), prev.data().end());
    for (std::size_t k = 0; k < next.size(); ++k) next[k] += scale * e.data()[k];
    seq.push_back(DenseHermitian::from_row_major(prev.n(), next));
  }
  SequenceStats st;
  std::vector<double> iters;
  std::optional<SolveRecord> prior;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    cfg.seed = derive_seed(seed, i);
    const WarmStart warm = prior ? make_warm_start(*prior, cfg) : random_warm_start(seq[i].n(), cfg.width(), cfg.seed);
    try {
      SolveRecord rec = chfsi_solve(seq[i], warm, cfg);
      if (prior) {
        iters.push_back(static_cast<double>(rec.iterations));
        ++st.warm_solves;
        st.one_iteration += rec.iterations == 1;
      }
      prior = std::move(rec);
    } catch (const SolveFailure& f) {
      ++st.failures;
      if (prior) iters.push_back(static_cast<double>(f.record().iterations));
      prior.reset();
    }
  }
  st.mean_iterations = mean(iters);
  return st;
}

Verdict warm_start_benefit(std::ostream& log) {
  const auto t0 = Clock::now();
  constexpr std::uint64_t kSeeds[] = {11, 222, 3333};
  auto avg = [&](double eps, bool independent) {
    SequenceStats total;
    for (std::uint64_t s : kSeeds) {
      const auto st = perturbation_sequence(eps, independent, s);
      total.mean_iterations += st.mean_iterations / std::size(kSeeds);
      total.one_iteration += st.one_iteration;
      total.warm_solves += st.warm_solves;
      total.failures += st.failures;
    }
    return total;
  };
  const auto small = avg(0.01, false);
  const auto large = avg(0.5, false);
  const auto indep = avg(0.0, true);
  const auto same = avg(0.0, false);
  log << "  eps=0.01: " << fmt("%.2f", small.mean_iterations) << "  eps=0.5: " << fmt("%.2f", large.mean_iterations)
      << "  independent: " << fmt("%.2f", indep.mean_iterations) << "  identical: " << same.one_iteration << "/"
      << same.warm_solves << " in one iteration\n";
  Verdict v;
  const std::size_t failures = small.failures + large.failures + indep.failures + same.failures;
  v.pass = small.mean_iterations <= large.mean_iterations && large.mean_iterations <= indep.mean_iterations &&
           same.one_iteration == same.warm_solves && failures == 0;
  v.detail = "mean iterations eps 1% " + fmt("%.2f", small.mean_iterations) + " <= eps 50% " +
             fmt("%.2f", large.mean_iterations) + " <= independent " + fmt("%.2f", indep.mean_iterations) +
             "; identical matrices " + std::to_string(same.one_iteration) + "/" + std::to_string(same.warm_solves) +
             " locked in one iteration; " + std::to_string(failures) + " failures (" +
             fmt("%.0f", seconds_since(t0)) + " s)";
  return v;
}

Verdict baseline_speedup(DeskData& desk, std::ostream& log) {
  const double t_random = mean(desk.series(log, "chfsi-random", "mean_time"));
  const double t_nosort = mean(desk.series(log, "scsf-no-sort", "mean_time"));
  const double t_scsf = mean(desk.series(log, "scsf", "mean_time"));
  const double speedup = t_random / t_scsf;
  Verdict v;
  v.pass = t_scsf < t_nosort && t_nosort < t_random && speedup >= 1.2;
  v.detail = "mean time scsf " + fmt("%.4f", t_scsf) + " s, scsf-no-sort " + fmt("%.4f", t_nosort) +
             " s, chfsi-random " + fmt("%.4f", t_random) + " s; speedup " + fmt("%.3f", speedup) + " (need >= 1.2)";
  return v;
}

// ---------------------------------------------------------------------------

double best_of(int reps, const std::function<void()>& f) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

Verdict sorting_cost(std::ostream& log) {
  constexpr std::size_t kP = 64, kP0 = 16;
  std::vector<ParameterField> fields;
  for (std::uint64_t s = 0; s < 1000; ++s) fields.push_back(grf_sample(kP, 90000 + s, 3.0, 2.0));
  SortResult truncated;
  const double t_trunc = best_of(3, [&] { truncated = sort_problems(fields, kP0); });
  SolveOrder full;
  const double t_full = best_of(3, [&] { full = greedy_sort_fields(fields); });

  std::vector<double> logn, logt;
  for (std::size_t n : {250, 500, 1000}) {
    const std::span<const ParameterField> part(fields.data(), n);
    double best = INFINITY;
    for (int r = 0; r < 5; ++r) best = std::min(best, sort_problems(part, kP0).greedy_seconds);
    logn.push_back(std::log(static_cast<double>(n)));
    logt.push_back(std::log(best));
    log << "  greedy phase N=" << n << ": " << fmt("%.4f", best) << " s\n";
  }
  const double mx = mean(logn), my = mean(logt);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < logn.size(); ++i) {
    sxy += (logn[i] - mx) * (logt[i] - my);
    sxx += (logn[i] - mx) * (logn[i] - mx);
  }
  const double slope = sxy / sxx;
  Verdict v;
  v.pass = t_trunc <= t_full / 3.0 && slope >= 1.7 && slope <= 2.3;
  v.detail = "truncated sort " + fmt("%.4f", t_trunc) + " s (fft " + fmt("%.4f", truncated.fft_seconds) + ", greedy " +
             fmt("%.4f", truncated.greedy_seconds) + ") vs full-field greedy " + fmt("%.4f", t_full) + " s (ratio " +
             fmt("%.3f", t_trunc / t_full) + ", need <= 0.333); greedy exponent " + fmt("%.2f", slope) +
             " (need 1.7..2.3)";
  return v;
}

Verdict sort_quality_plateau(DeskData& desk, std::ostream& log) {
  const double p20 = mean(desk.series(log, "scsf", "mean_iterations"));
  const double pfull = mean(desk.series(log, "scsf-full-p0", "mean_iterations"));
  const double rel = std::abs(p20 - pfull) / pfull;
  Verdict v;
  v.pass = rel <= 0.1;
  v.detail = "mean iterations p0=20 " + fmt("%.3f", p20) + " vs p0=p " + fmt("%.3f", pfull) + " (relative gap " +
             fmt("%.3f", rel) + ", need <= 0.1)";
  return v;
}

// ---------------------------------------------------------------------------

Verdict kernel_properties(std::ostream& log) {
  const auto t0 = Clock::now();
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  // Chebyshev filter on diagonal matrices vs the closed-form polynomial.
  double cheb = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(-5.0, 30.0);
    std::vector<double> d(40);
    for (auto& x : d) x = u(rng);
    d[0] = -8.0;
    const auto params = FilterParams::from_interval(5 + static_cast<int>(s) * 3, -8.0, -4.0, 31.0);
    Rng r(s);
    const auto y = VectorBlock::gaussian(40, 4, r);
    const auto out = chebyshev_filter(DenseHermitian::diagonal(d), y, params);
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < 40; ++i) {
        const double want = oracle::filter_closed_form(params.degree(), d[i], params.lambda(), params.center(),
                                                       params.half_width()) *
                            y(i, j);
        cheb = std::max(cheb, std::abs(out(i, j) - want) / std::max(std::abs(want), 1e-300));
      }
  }
  expect(cheb <= 1e-10, "chebyshev diagonal " + fmt("%.2e", cheb));

  // QR orthonormality.
  double qr = 0.0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng r(s);
    const std::size_t n = 10 + 31 * s;
    const std::size_t k = 1 + (s * 17) % std::min<std::size_t>(n, 60);
    qr = std::max(qr, orthonormality_error(qr_orthonormalize(VectorBlock::gaussian(n, k, r)).q));
  }
  expect(qr < 1e-12, "qr " + fmt("%.2e", qr));

  // Parseval.
  double parseval = 0.0;
  for (std::size_t p : {4, 8, 32, 64, 128}) {
    const auto f = grf_raw(p, p, 3.0, 2.0);
    const auto s = fft2d(f, p);
    double ef = 0.0, es = 0.0;
    for (double x : f) ef += x * x;
    for (const auto& z : s.values) es += std::norm(z);
    parseval = std::max(parseval, std::abs(es / static_cast<double>(p * p) - ef) / ef);
  }
  expect(parseval <= 1e-8, "parseval " + fmt("%.2e", parseval));

  // Dirichlet Laplacian spectrum.
  double spec = 0.0;
  for (std::size_t nx : {5, 12, 20}) {
    const Grid2D g{nx, nx + 3, 1.0, 1.3};
    auto want = oracle::laplacian_spectrum(g.nx, g.ny, g.lx, g.ly);
    std::sort(want.begin(), want.end());
    const ParameterField unit{8, std::vector<double>(64, 1.0), FieldKind::grf, 0};
    OperatorSpec os{Family::poisson, g, {unit}, std::nullopt};
    const auto got = dense_eigenvalues(discretize(os).matrix);
    for (std::size_t i = 0; i < want.size(); ++i) spec = std::max(spec, std::abs(got[i] - want[i]) / want[i]);
  }
  expect(spec <= 1e-9, "laplacian spectrum " + fmt("%.2e", spec));

  // The 2 x 2 stencil with unit spacing, and the 1D second-difference
  // stencil as the Kronecker sum of two tridiagonal matrices.
  {
    const ParameterField unit{2, std::vector<double>(4, 1.0), FieldKind::grf, 0};
    OperatorSpec os{Family::poisson, Grid2D{2, 2, 3.0, 3.0}, {unit}, std::nullopt};
    const auto a = discretize(os).matrix;
    const double stencil[4][4] = {{-4, 1, 1, 0}, {1, -4, 0, 1}, {1, 0, -4, 1}, {0, 1, 1, -4}};
    bool exact = true;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) exact &= -a(i, j) == stencil[i][j];
    expect(exact, "2x2 stencil");

    const std::size_t nx = 7, ny = 5;
    const Grid2D g{nx, ny, 0.5 * (nx + 1), 0.5 * (ny + 1)};
    const auto lap = laplacian(g);
    auto tri = [](std::size_t i, std::size_t j, double h) {
      const double s = 1.0 / (h * h);
      return i == j ? -2.0 * s : (i + 1 == j || j + 1 == i) ? s : 0.0;
    };
    bool kron = true;
    for (std::size_t r = 0; r < nx * ny; ++r)
      for (std::size_t c = 0; c < nx * ny; ++c) {
        const std::size_t rx = r % nx, ry = r / nx, cx = c % nx, cy = c / nx;
        const double want = (ry == cy ? tri(rx, cx, g.dx()) : 0.0) + (rx == cx ? tri(ry, cy, g.dy()) : 0.0);
        kron &= lap(r, c) == -want;
      }
    expect(kron, "five-point operator as a sum of 1D second differences");
  }

  const double secs = seconds_since(t0);
  expect(secs < 120.0, "runtime " + fmt("%.1f", secs) + " s");
  Verdict v;
  v.pass = failed.empty();
  v.detail = "chebyshev " + fmt("%.1e", cheb) + ", qr " + fmt("%.1e", qr) + ", parseval " + fmt("%.1e", parseval) +
             ", laplacian " + fmt("%.1e", spec) + ", stencils " + (v.pass ? "exact" : "see failures") + " (" +
             fmt("%.1f", secs) + " s)";
  for (const auto& f : failed) v.detail += "; FAILED " + f;
  return v;
}

Verdict mode_invariance(DeskData& desk, std::ostream& log) {
  double worst = 0.0;
  std::size_t failures = 0;
  for (const auto& s : desk.get(log)["seeds"]) {
    worst = std::max(worst, s["max_deviation_over_tol"].get<double>());
    for (const char* m : {"chfsi-random", "scsf-no-sort", "scsf"}) failures += s["modes"][m]["failures"].get<std::size_t>();
  }
  Verdict v;
  v.pass = worst <= 10.0 && failures == 0;
  v.detail = "max pairwise eigenvalue gap " + fmt("%.3f", worst) + " x tol*||A||_max (need <= 10), " +
             std::to_string(failures) + " failed solves";
  return v;
}

const char* const kNames[] = {"",
                              "oracle equivalence",
                              "sorted vs unsorted iterations",
                              "warm-start benefit",
                              "baseline speedup direction",
                              "sorting cost scaling",
                              "sort-quality plateau",
                              "kernel property suites",
                              "result invariance across modes"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance runs"};
  int criterion = 0;
  std::string desk_file, desk_out;
  app.add_option("--criterion", criterion, "criterion number (1-8); all when omitted")->check(CLI::Range(1, 8));
  app.add_option("--desk-file", desk_file, "stored desk benchmark to reuse");
  app.add_option("--desk-run", desk_out, "compute the desk benchmark into this file and exit");
  CLI11_PARSE(app, argc, argv);

  if (!desk_out.empty()) {
    const json d = desk_run(std::cout);
    std::ofstream(desk_out) << d.dump(2) << "\n";
    std::cout << "desk benchmark written to " << desk_out << " (" << fmt("%.0f", d["seconds"].get<double>())
              << " s)\n";
    return 0;
  }

  DeskData desk(desk_file.empty() ? std::nullopt : std::optional(desk_file));
  std::ostringstream log;
  const std::function<Verdict()> runners[] = {
      {},
      [&] { return oracle_equivalence(log); },
      [&] { return sort_iteration_reduction(desk, log); },
      [&] { return warm_start_benefit(log); },
      [&] { return baseline_speedup(desk, log); },
      [&] { return sorting_cost(log); },
      [&] { return sort_quality_plateau(desk, log); },
      [&] { return kernel_properties(log); },
      [&] { return mode_invariance(desk, log); },
  };
  std::vector<int> which;
  if (criterion != 0) which.push_back(criterion);
  else for (int c = 1; c <= 8; ++c) which.push_back(c);

  bool all = true;
  std::vector<std::string> lines;
  for (int c : which) {
    Verdict v;
    try {
      v = runners[c]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all &= v.pass;
    char head[96];
    std::snprintf(head, sizeof head, "[%s] criterion %d (%s): ", v.pass ? "PASS" : "FAIL", c, kNames[c]);
    lines.push_back(head + v.detail);
    std::cout << log.str() << lines.back() << "\n" << std::flush;
    log.str("");
  }
  if (which.size() > 1) {
    std::cout << "\nsummary\n";
    for (const auto& l : lines) std::cout << l.substr(0, l.find(':')) << "\n";
  }
  return all ? 0 : 1;
}
