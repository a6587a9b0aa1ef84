#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>

#include "eigenforge/error.hpp"

namespace eigenforge::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void echo_config(const fs::path& dir, const RunConfig& cfg) {
  write_text(dir / "config.txt", cfg.resolved().to_text());
}

/// Dataset-level keys of cfg replaced by what the manifest records.
RunConfig with_dataset(RunConfig cfg, const DatasetManifest& m) {
  cfg.family = std::string(to_string(m.family));
  cfg.nx = m.grid.nx;
  cfg.ny = m.grid.ny;
  cfg.lx = m.grid.lx;
  cfg.ly = m.grid.ly;
  cfg.n_problems = m.N;
  cfg.master_seed = m.master_seed;
  cfg.tau = m.grf.tau;
  cfg.alpha = m.grf.alpha;
  cfg.field_side = m.field_side;
  return cfg;
}

BenchStat stat(const std::vector<double>& xs) {
  BenchStat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(v / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

DatasetManifest cmd_gen(const RunConfig& cfg_in, std::ostream& out) {
  const RunConfig cfg = cfg_in.resolved();
  cfg.validate();
  const Family family = cfg.family_tag();
  const auto problems =
      generate_problem_set(family, cfg.n_problems, cfg.grid(), cfg.master_seed, cfg.grf(), cfg.field_side);
  DatasetManifest manifest = problem_set_manifest(problems, cfg.master_seed, cfg.grf(), cfg.field_side);
  const fs::path dir(cfg.out);
  write_problem_set(dir, problems, manifest);
  echo_config(dir, cfg);

  double lo = problems[0].matrix().max_abs(), hi = lo;
  std::size_t symmetrized = 0;
  for (const auto& p : problems) {
    lo = std::min(lo, p.matrix().max_abs());
    hi = std::max(hi, p.matrix().max_abs());
    if (p.disc.symmetrized) ++symmetrized;
  }
  out << "generated N = " << problems.size() << " " << to_string(family) << " problems, grid " << cfg.nx << "x"
      << cfg.ny << " (n = " << cfg.grid().size() << "), field side " << cfg.field_side << "\n";
  out << "||A||_max in [" << fmt("%.4g", lo) << ", " << fmt("%.4g", hi) << "]";
  if (family == Family::elliptic) {
    std::size_t elliptic = 0, attempts = 0;
    for (const auto& p : problems) {
      if (p.spec.coeffs && p.spec.coeffs->is_elliptic()) ++elliptic;
      if (p.spec.coeffs) attempts += p.spec.coeffs->attempts;
    }
    out << ", ellipticity holds for " << elliptic << "/" << problems.size() << ", "
        << fmt("%.2f", static_cast<double>(attempts) / static_cast<double>(problems.size()))
        << " draws per tuple, symmetrized " << symmetrized << "/" << problems.size();
  }
  out << "\nwrote " << (dir / "manifest.json").string() << "\n";
  return manifest;
}

SortResult cmd_sort(const fs::path& dir, std::size_t p0, std::ostream& out) {
  const Dataset ds = read_dataset(dir);
  const auto problems = rebuild_problems(ds, false);
  SortResult sr = sort_problem_set(problems, p0);
  DatasetManifest m = ds.manifest;
  m.solve_order = sr.order;
  m.sort = SortInfo{p0, sr.fft_seconds, sr.greedy_seconds};
  write_manifest(dir, m);
  char line[128];
  std::snprintf(line, sizeof line, "%12s %12s %12s\n", "FFT[s]", "Greedy[s]", "Total[s]");
  out << line;
  std::snprintf(line, sizeof line, "%12.6f %12.6f %12.6f\n", sr.fft_seconds, sr.greedy_seconds, sr.total_seconds());
  out << line;
  out << "order:";
  const std::size_t shown = std::min<std::size_t>(sr.order.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) out << " " << sr.order.permutation[i];
  if (shown < sr.order.size()) out << " ...";
  out << "\n";
  return sr;
}

RunReport cmd_solve(const fs::path& dir, const RunConfig& cfg_in, std::ostream& out) {
  const Dataset ds = read_dataset(dir);
  const RunConfig cfg = with_dataset(cfg_in, ds.manifest).resolved();
  cfg.validate();
  const auto problems = rebuild_problems(ds, false);
  RunPlan plan;
  plan.mode = cfg.mode_tag();
  plan.solver = cfg.solver();
  plan.p0 = cfg.p0;
  plan.chunks = cfg.chunks;
  plan.seed = ds.manifest.master_seed;
  if (plan.mode == RunMode::scsf && ds.manifest.solve_order) plan.order = ds.manifest.solve_order;
  const RunReport report = run(problems, plan);

  write_dataset(dir, problems, report, ds.manifest, cfg.store_vectors);
  write_text(dir / "run_report.json", report_to_json(report));
  echo_config(dir, cfg);

  double worst = 0.0;
  for (const auto& r : report.results) worst = std::max(worst, r.record.worst_residual);
  out << "mode " << to_string(plan.mode) << ": " << report.results.size() << " problems, mean iterations "
      << fmt("%.2f", report.aggregates.mean_iterations) << ", mean time " << fmt("%.4f", report.aggregates.mean_time_with_sort)
      << " s, max residual " << fmt("%.3e", worst) << ", failures " << report.aggregates.failures << "\n";
  for (const auto& r : report.results) {
    if (r.failed) out << "  problem " << r.id << ": " << r.error << "\n";
  }
  return report;
}

std::string BenchResult::to_text() const {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %20s %16s %20s %16s %7s\n", "mode", "time[s] mean+-sd", "iters mean+-sd",
                "matvecs mean+-sd", "speedup mean+-sd", "failed");
  s += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-14s %10.4f+-%-8.4f %8.2f+-%-6.2f %10.1f+-%-8.1f %8.3f+-%-6.3f %7zu\n",
                  std::string(to_string(r.mode)).c_str(), r.time.mean, r.time.stddev, r.iterations.mean,
                  r.iterations.stddev, r.matvecs.mean, r.matvecs.stddev, r.speedup.mean, r.speedup.stddev,
                  r.failures);
    s += line;
  }
  return s;
}

BenchResult cmd_bench(const RunConfig& cfg_in, std::ostream& out) {
  const RunConfig cfg = cfg_in.resolved();
  cfg.validate();
  const RunMode modes[] = {RunMode::chfsi_random, RunMode::scsf_no_sort, RunMode::scsf};
  BenchResult result;
  std::vector<std::vector<double>> time(3), iters(3), mv(3), speed(3);
  std::vector<std::size_t> fails(3, 0);
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t r = 0; r < cfg.repeat; ++r) {
    const std::uint64_t seed = cfg.master_seed + r * cfg.n_problems;
    const auto problems = generate_problem_set(cfg.family_tag(), cfg.n_problems, cfg.grid(), seed, cfg.grf(),
                                               cfg.field_side, false);
    std::vector<RunReport> reports;
    for (RunMode mode : modes) {
      RunPlan plan;
      plan.mode = mode;
      plan.solver = cfg.solver();
      plan.p0 = cfg.p0;
      plan.chunks = cfg.chunks;
      plan.seed = seed;
      reports.push_back(run(problems, plan));
    }
    const ComparisonTable table = compare(reports);
    out << "master seed " << seed << "\n" << table.to_text();
    for (std::size_t k = 0; k < 3; ++k) {
      time[k].push_back(table.rows[k].mean_time);
      iters[k].push_back(table.rows[k].mean_iterations);
      mv[k].push_back(table.rows[k].mean_matvecs);
      speed[k].push_back(table.rows[k].speedup);
      fails[k] += table.rows[k].failures;
    }
    runs.push_back(nlohmann::json{{"master_seed", seed},
                                  {"comparison", nlohmann::json::parse(comparison_to_json(table))}});
    result.tables.push_back(table);
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < 3; ++k) {
    BenchRow row{modes[k], stat(time[k]), stat(iters[k]), stat(mv[k]), stat(speed[k]), fails[k]};
    result.rows.push_back(row);
    rows.push_back(nlohmann::json{{"mode", std::string(to_string(row.mode))},
                                  {"time_mean", row.time.mean},
                                  {"time_std", row.time.stddev},
                                  {"iterations_mean", row.iterations.mean},
                                  {"iterations_std", row.iterations.stddev},
                                  {"matvecs_mean", row.matvecs.mean},
                                  {"matvecs_std", row.matvecs.stddev},
                                  {"speedup_mean", row.speedup.mean},
                                  {"speedup_std", row.speedup.stddev},
                                  {"failures", row.failures}});
  }
  out << "over " << cfg.repeat << " master seed(s):\n" << result.to_text();
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  write_text(dir / "bench.json", nlohmann::json{{"repeat", cfg.repeat}, {"summary", rows}, {"runs", runs}}.dump(2) + "\n");
  echo_config(dir, cfg);
  return result;
}

ValidationReport cmd_validate(const fs::path& dir, std::size_t oracle_cap, std::ostream& out) {
  const ValidationReport report = validate_dataset(dir, oracle_cap);
  out << report.to_text();
  out << (report.clean() ? "clean\n" : "FLAGGED\n");
  return report;
}

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> family, mode, out;
  std::optional<std::size_t> nx, ny, n_problems, field_side, L, p0, extra, max_iters, stall_iters, chunks, repeat,
      oracle_cap;
  std::optional<std::uint64_t> seed;
  std::optional<double> lx, ly, tau, alpha, tol;
  std::optional<int> m;
  bool no_vectors = false;

  RunConfig resolve() const {
    RunConfig c = config ? load_config(*config) : RunConfig{};
    c.apply_environment();
    if (family) c.family = *family;
    if (mode) c.mode = *mode;
    if (out) c.out = *out;
    if (nx) c.nx = *nx;
    if (ny) c.ny = *ny;
    if (nx && !ny) c.ny = *nx;
    if (n_problems) c.n_problems = *n_problems;
    if (field_side) c.field_side = *field_side;
    if (L) c.L = *L;
    if (p0) c.p0 = *p0;
    if (extra) c.extra = *extra;
    if (max_iters) c.max_iters = *max_iters;
    if (stall_iters) c.stall_iters = *stall_iters;
    if (chunks) c.chunks = *chunks;
    if (repeat) c.repeat = *repeat;
    if (oracle_cap) c.oracle_cap = *oracle_cap;
    if (seed) c.master_seed = *seed;
    if (lx) c.lx = *lx;
    if (ly) c.ly = *ly;
    if (tau) c.tau = *tau;
    if (alpha) c.alpha = *alpha;
    if (tol) c.tol = *tol;
    if (m) c.m = *m;
    if (no_vectors) c.store_vectors = false;
    return c;
  }
};

void problem_flags(CLI::App* app, Overrides& o) {
  app->add_option("--family", o.family, "poisson | elliptic | helmholtz | vibration");
  app->add_option("--nx", o.nx, "interior grid points in x");
  app->add_option("--ny", o.ny, "interior grid points in y (default: nx)");
  app->add_option("--lx", o.lx, "domain length in x");
  app->add_option("--ly", o.ly, "domain length in y");
  app->add_option("-N,--n-problems", o.n_problems, "number of problems");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--tau", o.tau, "GRF inverse length scale");
  app->add_option("--alpha", o.alpha, "GRF smoothness exponent");
  app->add_option("--field-side", o.field_side, "coefficient field side p (power of two)");
  app->add_option("--out", o.out, "output directory");
}

void solver_flags(CLI::App* app, Overrides& o) {
  app->add_option("--L", o.L, "wanted eigenpairs");
  app->add_option("--tol", o.tol, "relative residual tolerance");
  app->add_option("--m", o.m, "Chebyshev filter degree");
  app->add_option("--p0", o.p0, "FFT truncation side");
  app->add_option("--extra", o.extra, "extra subspace columns (default ceil(0.2 L))");
  app->add_option("--max-iters", o.max_iters, "iteration cap per solve");
  app->add_option("--stall-iters", o.stall_iters, "give up after this many iterations without progress (0 = never)");
  app->add_option("--chunks", o.chunks, "independent chunks solved in parallel");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"eigenforge: sorted Chebyshev-filtered eigenpair dataset generation"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "key = value configuration file (flags override it)");

  auto* gen = app.add_subcommand("gen", "generate a problem set");
  problem_flags(gen, o);

  std::string dataset;
  auto* sort = app.add_subcommand("sort", "compute the truncated-FFT solve order of a dataset");
  sort->add_option("dataset", dataset, "dataset directory")->required();
  sort->add_option("--p0", o.p0, "FFT truncation side");

  auto* solve = app.add_subcommand("solve", "solve a stored problem set");
  solve->add_option("dataset", dataset, "dataset directory")->required();
  solve->add_option("--mode", o.mode, "scsf | scsf-no-sort | chfsi-random | oracle");
  solver_flags(solve, o);
  solve->add_flag("--no-vectors", o.no_vectors, "store eigenvalues only");

  auto* bench = app.add_subcommand("bench", "compare chfsi-random, scsf-no-sort and scsf on generated sets");
  problem_flags(bench, o);
  solver_flags(bench, o);
  bench->add_option("--repeat", o.repeat, "number of master seeds");

  auto* validate = app.add_subcommand("validate", "recheck a solved dataset");
  validate->add_option("dataset", dataset, "dataset directory")->required();
  validate->add_option("--oracle-cap", o.oracle_cap, "largest n cross-checked against the dense oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = o.resolve();
    if (gen->parsed()) {
      cmd_gen(cfg, out);
      return kExitOk;
    }
    if (sort->parsed()) {
      cmd_sort(dataset, cfg.p0, out);
      return kExitOk;
    }
    if (solve->parsed()) {
      const RunReport r = cmd_solve(dataset, cfg, out);
      return r.ok() ? kExitOk : kExitNumerical;
    }
    if (bench->parsed()) {
      const BenchResult r = cmd_bench(cfg, out);
      for (const auto& row : r.rows)
        if (row.failures > 0) return kExitNumerical;
      return kExitOk;
    }
    if (validate->parsed()) {
      return cmd_validate(dataset, cfg.oracle_cap, out).clean() ? kExitOk : kExitNumerical;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace eigenforge::cli
