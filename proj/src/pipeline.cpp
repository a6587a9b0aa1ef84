#include "eigenforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <thread>

#include "eigenforge/error.hpp"

namespace eigenforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolveRecord oracle_record(const DenseHermitian& a, std::size_t L) {
  const auto t0 = Clock::now();
  SolveRecord rec;
  rec.pairs = dense_eig_oracle(a, L);
  rec.residuals = relative_residuals(a, rec.pairs);
  rec.worst_residual = rec.residuals.empty() ? 0.0 : *std::max_element(rec.residuals.begin(), rec.residuals.end());
  rec.converged = true;
  rec.status = "oracle";
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

void solve_chunk(std::span<const Problem> problems, const RunPlan& plan, std::span<const std::size_t> order,
                 std::span<ProblemResult> out) {
  const SolveRecord* prev = nullptr;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t idx = order[pos];
    const Problem& prob = problems[idx];
    ProblemResult& res = out[pos];
    res.index = idx;
    res.id = prob.id;
    try {
      Discretization local;
      const Discretization* disc = &prob.disc;
      if (prob.disc.matrix.n() == 0) {
        local = discretize(prob.spec);
        disc = &local;
      }
      const DenseHermitian& a = disc->matrix;
      res.n = a.n();
      res.symmetrized = disc->symmetrized;
      res.asymmetry_norm = disc->asymmetry_norm;
      res.norm_max = a.max_abs();

      SolverConfig cfg = plan.solver;
      cfg.seed = derive_seed(plan.seed, prob.seed);
      if (plan.mode == RunMode::oracle) {
        res.record = oracle_record(a, cfg.L);
        continue;
      }
      const auto t0 = Clock::now();
      const bool inherit = prev != nullptr && plan.mode != RunMode::chfsi_random;
      const WarmStart warm = inherit ? make_warm_start(*prev, cfg) : random_warm_start(a.n(), cfg.width(), cfg.seed);
      res.origin = warm.origin;
      try {
        res.record = chfsi_solve(a, warm, cfg);
        prev = &res.record;
      } catch (const SolveFailure& e) {
        res.record = e.record();
        res.failed = true;
        res.error = e.what();
        prev = nullptr;
      }
      res.record.wall_seconds = seconds_since(t0);
    } catch (const Error& e) {
      res.failed = true;
      res.error = e.what();
      prev = nullptr;
    }
  }
}

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::scsf: return "scsf";
    case RunMode::scsf_no_sort: return "scsf-no-sort";
    case RunMode::chfsi_random: return "chfsi-random";
    case RunMode::oracle: return "oracle";
  }
  return "?";
}

RunMode parse_mode(std::string_view name) {
  for (RunMode m : {RunMode::scsf, RunMode::scsf_no_sort, RunMode::chfsi_random, RunMode::oracle}) {
    if (name == to_string(m)) return m;
  }
  throw InvalidArgument("unknown mode '" + std::string(name) +
                        "' (expected scsf, scsf-no-sort, chfsi-random or oracle)");
}

std::vector<std::size_t> chunk_bounds(std::size_t count, std::size_t chunks) {
  if (chunks == 0) throw InvalidArgument("chunk count must be >= 1");
  chunks = std::max<std::size_t>(1, std::min(chunks, count));
  std::vector<std::size_t> b(chunks + 1);
  for (std::size_t c = 0; c <= chunks; ++c) b[c] = c * count / chunks;
  return b;
}

RunAggregates aggregate(const RunReport& report) {
  RunAggregates ag;
  const double n = static_cast<double>(report.results.size());
  if (report.results.empty()) return ag;
  for (const auto& r : report.results) {
    ag.mean_wall_seconds += r.record.wall_seconds;
    ag.mean_iterations += static_cast<double>(r.record.iterations);
    ag.mean_matvecs += static_cast<double>(r.record.matvecs);
    ag.mean_flops += r.record.filter_flops_estimate;
    if (r.failed) ++ag.failures;
  }
  ag.mean_wall_seconds /= n;
  ag.mean_iterations /= n;
  ag.mean_matvecs /= n;
  ag.mean_flops /= n;
  ag.mean_time_with_sort = ag.mean_wall_seconds + report.sort.total_seconds() / n;
  return ag;
}

RunReport run(std::span<const Problem> problems, const RunPlan& plan) {
  if (problems.empty()) throw InvalidArgument("run: empty problem list");
  const std::size_t count = problems.size();
  RunReport report;
  report.mode = plan.mode;
  report.plan = plan;

  if (plan.mode == RunMode::scsf) {
    if (plan.order) {
      if (!is_permutation_of(*plan.order, count)) throw InvalidArgument("run: given order is not a permutation");
      report.order = *plan.order;
    } else {
      report.sort = sort_problem_set(problems, plan.p0);
      report.order = report.sort.order;
    }
  } else {
    report.order.permutation.resize(count);
    std::iota(report.order.permutation.begin(), report.order.permutation.end(), std::size_t{0});
  }

  report.results.resize(count);
  const auto bounds = chunk_bounds(count, plan.chunks);
  const std::span<const std::size_t> order(report.order.permutation);
  const std::span<ProblemResult> results(report.results);
  auto chunk = [&](std::size_t c) {
    const std::size_t lo = bounds[c];
    const std::size_t len = bounds[c + 1] - lo;
    solve_chunk(problems, plan, order.subspan(lo, len), results.subspan(lo, len));
  };
  const std::size_t chunks = bounds.size() - 1;
  if (chunks == 1) {
    chunk(0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) workers.emplace_back(chunk, c);
    for (auto& w : workers) w.join();
  }
  report.aggregates = aggregate(report);
  return report;
}

ComparisonTable compare(std::span<const RunReport> reports) {
  if (reports.empty()) throw InvalidArgument("compare: no reports");
  const RunReport& first = reports[0];
  auto ids = [](const RunReport& r) {
    std::vector<std::size_t> v;
    for (const auto& x : r.results) v.push_back(x.id);
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto first_ids = ids(first);
  ComparisonTable table;
  for (const auto& r : reports) {
    if (!(r.plan.solver == first.plan.solver)) throw InvalidArgument("compare: solver configurations differ");
    if (ids(r) != first_ids) throw InvalidArgument("compare: reports cover different problem sets");
    ComparisonRow row;
    row.mode = r.mode;
    row.mean_time = r.aggregates.mean_time_with_sort;
    row.mean_iterations = r.aggregates.mean_iterations;
    row.mean_matvecs = r.aggregates.mean_matvecs;
    row.mean_flops = r.aggregates.mean_flops;
    row.failures = r.aggregates.failures;
    row.speedup = row.mean_time > 0.0 ? first.aggregates.mean_time_with_sort / row.mean_time : 1.0;
    table.rows.push_back(row);
  }
  return table;
}

std::string ComparisonTable::to_text() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %12s %10s %12s %12s %9s %8s\n", "mode", "time[s]", "iters", "matvecs",
                "flops", "speedup", "failed");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-14s %12.4f %10.2f %12.1f %12.4e %9.3f %8zu\n",
                  std::string(to_string(r.mode)).c_str(), r.mean_time, r.mean_iterations, r.mean_matvecs,
                  r.mean_flops, r.speedup, r.failures);
    out += line;
  }
  return out;
}

}  // namespace eigenforge
