#include "eigenforge/dataset_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "eigenforge/error.hpp"

namespace eigenforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(x);
  return x;
}

std::string padded_id(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu", id);
  return buf;
}

std::string field_file(std::size_t id, std::size_t k) { return "P_" + padded_id(id) + "_" + std::to_string(k) + ".f64"; }
std::string values_file(std::size_t id) { return "eigvals_" + padded_id(id) + ".f64"; }
std::string vectors_file(std::size_t id) { return "eigvecs_" + padded_id(id) + ".f64"; }

json coeffs_json(const EllipticCoeffs& c) {
  return json{{"a11", c.a11}, {"a12", c.a12}, {"a22", c.a22}, {"a1", c.a1},
              {"a2", c.a2},   {"a0", c.a0},   {"attempts", c.attempts}};
}

EllipticCoeffs coeffs_from(const json& j) {
  EllipticCoeffs c;
  c.a11 = j.at("a11").get<double>();
  c.a12 = j.at("a12").get<double>();
  c.a22 = j.at("a22").get<double>();
  c.a1 = j.at("a1").get<double>();
  c.a2 = j.at("a2").get<double>();
  c.a0 = j.at("a0").get<double>();
  c.attempts = j.at("attempts").get<std::size_t>();
  return c;
}

json solver_json(const SolverConfig& s) {
  return json{{"L", s.L},
              {"extra", s.extra},
              {"m", s.m},
              {"tol", s.tol},
              {"max_iters", s.max_iters},
              {"stall_iters", s.stall_iters},
              {"lanczos_steps", s.lanczos_steps}};
}

/// n x k column-major block -> n x k row-major buffer.
std::vector<double> to_row_major(const VectorBlock& v) {
  std::vector<double> out(v.n() * v.k());
  for (std::size_t i = 0; i < v.n(); ++i)
    for (std::size_t j = 0; j < v.k(); ++j) out[i * v.k() + j] = v(i, j);
  return out;
}

VectorBlock from_row_major(std::size_t n, std::size_t k, std::span<const double> data) {
  VectorBlock v(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) v(i, j) = data[i * k + j];
  return v;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_f64(const fs::path& path, std::span<const double> values) {
  std::vector<std::uint64_t> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) raw[i] = to_le(std::bit_cast<std::uint64_t>(values[i]));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<double> read_f64(const fs::path& path, std::size_t expected) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw IoError("cannot read " + path.string() + ": " + ec.message());
  if (size != expected * 8) {
    throw LengthMismatch(path.string() + ": expected " + std::to_string(expected * 8) + " bytes (" +
                         std::to_string(expected) + " float64), found " + std::to_string(size));
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint64_t> raw(expected);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected * 8));
  if (!f) throw IoError("read failed: " + path.string());
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) out[i] = std::bit_cast<double>(to_le(raw[i]));
  return out;
}

std::vector<std::string> field_roles(Family family) {
  switch (family) {
    case Family::poisson: return {"K"};
    case Family::elliptic: return {"coeffs"};
    case Family::helmholtz: return {"p", "k"};
    case Family::vibration: return {"D", "rho"};
  }
  return {};
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["family"] = std::string(to_string(m.family));
  j["grid"] = json{{"nx", m.grid.nx}, {"ny", m.grid.ny}, {"lx", m.grid.lx}, {"ly", m.grid.ly}};
  j["N"] = m.N;
  j["L"] = m.L;
  j["tol"] = m.tol;
  j["master_seed"] = m.master_seed;
  j["grf"] = json{{"tau", m.grf.tau}, {"alpha", m.grf.alpha}};
  j["field_side"] = m.field_side;
  j["solve_order"] = m.solve_order ? json(m.solve_order->permutation) : json(nullptr);
  j["sort"] = m.sort ? json{{"p0", m.sort->p0},
                            {"fft_seconds", m.sort->fft_seconds},
                            {"greedy_seconds", m.sort->greedy_seconds}}
                     : json(nullptr);
  j["solved"] = m.solved;
  j["mode"] = m.mode;
  j["vectors_stored"] = m.vectors_stored;
  json probs = json::array();
  for (const auto& p : m.problems) {
    json e;
    e["id"] = p.id;
    e["seed"] = p.seed;
    e["n"] = p.n;
    json fields = json::array();
    for (const auto& f : p.fields) {
      fields.push_back(json{{"role", f.role},
                            {"kind", std::string(to_string(f.kind))},
                            {"p", f.p},
                            {"seed", f.seed},
                            {"file", f.file}});
    }
    e["fields"] = fields;
    e["coeffs"] = p.coeffs ? coeffs_json(*p.coeffs) : json(nullptr);
    e["symmetrized"] = p.symmetrized;
    e["asymmetry_norm"] = p.asymmetry_norm;
    if (p.solve) {
      const auto& s = *p.solve;
      e["residual_max"] = std::isfinite(s.residual_max) ? json(s.residual_max) : json(nullptr);
      e["iterations"] = s.iterations;
      e["matvecs"] = s.matvecs;
      e["wall_seconds"] = s.wall_seconds;
      e["converged"] = s.converged;
      e["status"] = s.status;
      e["eigenvalues"] = s.eigenvalues_file;
      e["eigenvectors"] = s.eigenvectors_file.empty() ? json(nullptr) : json(s.eigenvectors_file);
    }
    probs.push_back(e);
  }
  j["problems"] = probs;
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw FormatError("manifest.json: missing integer format_version");
  }
  DatasetManifest m;
  m.format_version = j["format_version"].get<int>();
  if (m.format_version != kFormatVersion) {
    throw VersionMismatch("manifest.json: format_version " + std::to_string(m.format_version) +
                          " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  try {
    m.family = parse_family(j.at("family").get<std::string>());
    const auto& g = j.at("grid");
    m.grid = Grid2D{g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>(), g.at("lx").get<double>(),
                    g.at("ly").get<double>()};
    m.N = j.at("N").get<std::size_t>();
    m.L = j.at("L").get<std::size_t>();
    m.tol = j.at("tol").get<double>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.grf = GrfParams{j.at("grf").at("tau").get<double>(), j.at("grf").at("alpha").get<double>()};
    m.field_side = j.at("field_side").get<std::size_t>();
    if (!j.at("solve_order").is_null()) {
      m.solve_order = SolveOrder{j["solve_order"].get<std::vector<std::size_t>>()};
    }
    if (!j.at("sort").is_null()) {
      const auto& s = j["sort"];
      m.sort = SortInfo{s.at("p0").get<std::size_t>(), s.at("fft_seconds").get<double>(),
                        s.at("greedy_seconds").get<double>()};
    }
    m.solved = j.at("solved").get<bool>();
    m.mode = j.at("mode").get<std::string>();
    m.vectors_stored = j.at("vectors_stored").get<bool>();
    for (const auto& e : j.at("problems")) {
      ProblemEntry p;
      p.id = e.at("id").get<std::size_t>();
      p.seed = e.at("seed").get<std::uint64_t>();
      p.n = e.at("n").get<std::size_t>();
      for (const auto& f : e.at("fields")) {
        p.fields.push_back(FieldEntry{f.at("role").get<std::string>(),
                                      parse_field_kind(f.at("kind").get<std::string>()),
                                      f.at("p").get<std::size_t>(), f.at("seed").get<std::uint64_t>(),
                                      f.at("file").get<std::string>()});
      }
      if (!e.at("coeffs").is_null()) p.coeffs = coeffs_from(e["coeffs"]);
      p.symmetrized = e.at("symmetrized").get<bool>();
      p.asymmetry_norm = e.at("asymmetry_norm").get<double>();
      if (e.contains("residual_max")) {
        SolveSummary s;
        s.residual_max = e.at("residual_max").is_null() ? std::numeric_limits<double>::infinity()
                                                         : e["residual_max"].get<double>();
        s.iterations = e.at("iterations").get<std::size_t>();
        s.matvecs = e.at("matvecs").get<std::uint64_t>();
        s.wall_seconds = e.at("wall_seconds").get<double>();
        s.converged = e.at("converged").get<bool>();
        s.status = e.at("status").get<std::string>();
        s.eigenvalues_file = e.at("eigenvalues").get<std::string>();
        if (!e.at("eigenvectors").is_null()) s.eigenvectors_file = e["eigenvectors"].get<std::string>();
        p.solve = s;
      }
      m.problems.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  if (m.problems.size() != m.N) {
    throw FormatError("manifest.json: N = " + std::to_string(m.N) + " but " + std::to_string(m.problems.size()) +
                      " problem entries");
  }
  return m;
}

DatasetManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw IoError("no manifest.json in " + dir.string());
  return manifest_from_json(read_text(path));
}

void write_manifest(const fs::path& dir, const DatasetManifest& manifest) {
  ensure_dir(dir);
  write_text(dir / "manifest.json", manifest_to_json(manifest));
}

DatasetManifest problem_set_manifest(std::span<const Problem> problems, std::uint64_t master_seed,
                                     const GrfParams& grf, std::size_t field_side) {
  if (problems.empty()) throw InvalidArgument("problem_set_manifest: no problems");
  DatasetManifest m;
  m.family = problems[0].spec.family;
  m.grid = problems[0].spec.grid;
  m.N = problems.size();
  m.master_seed = master_seed;
  m.grf = grf;
  m.field_side = field_side;
  m.vectors_stored = false;
  const auto roles = field_roles(m.family);
  for (const auto& prob : problems) {
    ProblemEntry e;
    e.id = prob.id;
    e.seed = prob.seed;
    e.n = prob.spec.grid.size();
    for (std::size_t k = 0; k < prob.spec.fields.size(); ++k) {
      const auto& f = prob.spec.fields[k];
      e.fields.push_back(FieldEntry{k < roles.size() ? roles[k] : "field" + std::to_string(k), f.kind, f.p,
                                    f.seed, field_file(prob.id, k)});
    }
    e.coeffs = prob.spec.coeffs;
    e.symmetrized = prob.disc.symmetrized;
    e.asymmetry_norm = prob.disc.asymmetry_norm;
    m.problems.push_back(std::move(e));
  }
  return m;
}

void write_problem_set(const fs::path& dir, std::span<const Problem> problems, const DatasetManifest& manifest) {
  ensure_dir(dir);
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& entry = manifest.problems.at(i);
    for (std::size_t k = 0; k < problems[i].spec.fields.size(); ++k) {
      write_f64(dir / entry.fields.at(k).file, problems[i].spec.fields[k].values);
    }
  }
  write_manifest(dir, manifest);
}

void write_dataset(const fs::path& dir, std::span<const Problem> problems, const RunReport& report,
                   DatasetManifest manifest, bool store_vectors) {
  if (manifest.problems.size() != problems.size()) {
    throw InvalidArgument("write_dataset: manifest and problem list differ in size");
  }
  ensure_dir(dir);
  manifest.L = report.plan.solver.L;
  manifest.tol = report.plan.solver.tol;
  manifest.solved = true;
  manifest.mode = std::string(to_string(report.mode));
  manifest.vectors_stored = store_vectors;
  manifest.solve_order = report.order;
  if (report.mode == RunMode::scsf && !report.plan.order) {
    manifest.sort = SortInfo{report.plan.p0, report.sort.fft_seconds, report.sort.greedy_seconds};
  }
  for (std::size_t i = 0; i < problems.size(); ++i) {
    for (std::size_t k = 0; k < problems[i].spec.fields.size(); ++k) {
      write_f64(dir / manifest.problems[i].fields.at(k).file, problems[i].spec.fields[k].values);
    }
  }
  for (const auto& r : report.results) {
    ProblemEntry& e = manifest.problems.at(r.index);
    e.symmetrized = r.symmetrized;
    e.asymmetry_norm = r.asymmetry_norm;
    SolveSummary s;
    s.residual_max = r.record.residuals.empty() ? std::numeric_limits<double>::infinity() : r.record.worst_residual;
    s.iterations = r.record.iterations;
    s.matvecs = r.record.matvecs;
    s.wall_seconds = r.record.wall_seconds;
    s.converged = r.record.converged && !r.failed;
    s.status = r.failed && r.record.status.empty() ? "error" : r.record.status;
    if (r.record.pairs.size() > 0) {
      s.eigenvalues_file = values_file(e.id);
      write_f64(dir / s.eigenvalues_file, r.record.pairs.values);
      if (store_vectors) {
        s.eigenvectors_file = vectors_file(e.id);
        write_f64(dir / s.eigenvectors_file, to_row_major(r.record.pairs.vectors));
      }
    }
    e.solve = s;
  }
  write_manifest(dir, manifest);
}

Dataset read_dataset(const fs::path& dir) {
  Dataset ds;
  ds.manifest = read_manifest(dir);
  const auto& m = ds.manifest;
  for (const auto& e : m.problems) {
    if (e.n != m.grid.size()) {
      throw FormatError("manifest.json: problem " + std::to_string(e.id) + " has n = " + std::to_string(e.n) +
                        ", grid implies " + std::to_string(m.grid.size()));
    }
    std::vector<ParameterField> fields;
    for (const auto& f : e.fields) {
      ParameterField pf;
      pf.p = f.p;
      pf.kind = f.kind;
      pf.seed = f.seed;
      pf.values = read_f64(dir / f.file, f.p * f.p);
      fields.push_back(std::move(pf));
    }
    ds.fields.push_back(std::move(fields));
    EigenPairs pairs;
    if (e.solve && !e.solve->eigenvalues_file.empty()) {
      pairs.values = read_f64(dir / e.solve->eigenvalues_file, m.L);
      if (!e.solve->eigenvectors_file.empty()) {
        const auto raw = read_f64(dir / e.solve->eigenvectors_file, e.n * m.L);
        pairs.vectors = from_row_major(e.n, m.L, raw);
      }
    }
    ds.eigenpairs.push_back(std::move(pairs));
  }
  return ds;
}

std::vector<Problem> rebuild_problems(const Dataset& dataset, bool assemble) {
  const auto& m = dataset.manifest;
  std::vector<Problem> out;
  out.reserve(m.problems.size());
  for (std::size_t i = 0; i < m.problems.size(); ++i) {
    Problem p;
    p.id = m.problems[i].id;
    p.seed = m.problems[i].seed;
    p.spec.family = m.family;
    p.spec.grid = m.grid;
    p.spec.fields = dataset.fields[i];
    p.spec.coeffs = m.problems[i].coeffs;
    if (assemble) p.disc = discretize(p.spec);
    out.push_back(std::move(p));
  }
  return out;
}

bool ValidationReport::clean() const {
  return std::all_of(entries.begin(), entries.end(), [](const ValidationEntry& e) { return e.issues.empty(); });
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  std::size_t flagged = 0;
  for (const auto& e : entries) {
    for (const auto& issue : e.issues) {
      os << "problem " << e.id << ": " << issue << "\n";
    }
    if (!e.issues.empty()) ++flagged;
  }
  char line[200];
  std::snprintf(line, sizeof line, "%zu problems, %zu flagged, oracle-checked %zu, max residual %.3e, max deviation %.3e\n",
                entries.size(), flagged, oracle_checked, max_residual, max_deviation);
  os << line;
  return os.str();
}

ValidationReport validate_dataset(const fs::path& dir, std::size_t oracle_cap) {
  const Dataset ds = read_dataset(dir);
  const auto& m = ds.manifest;
  ValidationReport report;
  for (std::size_t i = 0; i < m.problems.size(); ++i) {
    const auto& entry = m.problems[i];
    ValidationEntry v;
    v.id = entry.id;
    v.max_deviation = std::numeric_limits<double>::quiet_NaN();
    const EigenPairs& pairs = ds.eigenpairs[i];
    if (!entry.solve) {
      v.issues.push_back("no solve results");
      report.entries.push_back(std::move(v));
      continue;
    }
    if (!entry.solve->converged) v.issues.push_back("solver status " + entry.solve->status);
    if (pairs.values.empty()) {
      v.issues.push_back("no stored eigenvalues");
      report.entries.push_back(std::move(v));
      continue;
    }
    Problem prob;
    prob.spec.family = m.family;
    prob.spec.grid = m.grid;
    prob.spec.fields = ds.fields[i];
    prob.spec.coeffs = entry.coeffs;
    const DenseHermitian a = discretize(prob.spec).matrix;

    if (pairs.vectors.k() == pairs.values.size()) {
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        const double nrm = norm2(pairs.vectors.col(j));
        if (!(std::abs(nrm - 1.0) <= 1e-6)) {
          v.issues.push_back("eigenvector " + std::to_string(j) + " has norm " + std::to_string(nrm));
        }
        const double r = relative_residual(a, pairs.vectors.col(j), pairs.values[j]);
        if (!(r <= m.tol)) {
          char buf[120];
          std::snprintf(buf, sizeof buf, "pair %zu relative residual %.3e exceeds tol %.1e", j, r, m.tol);
          v.issues.push_back(buf);
        }
        v.max_residual = std::isnan(r) || std::isnan(v.max_residual) ? std::numeric_limits<double>::quiet_NaN()
                                                                      : std::max(v.max_residual, r);
      }
    }
    if (a.n() <= oracle_cap) {
      const EigenPairs oracle = dense_eig_oracle(a, pairs.size());
      double dev = 0.0;
      for (std::size_t j = 0; j < pairs.size(); ++j) dev = std::max(dev, std::abs(oracle.values[j] - pairs.values[j]));
      v.max_deviation = dev;
      v.oracle_checked = true;
      ++report.oracle_checked;
      const double bound = std::max(1e-8, 10.0 * m.tol) * a.max_abs();
      if (!(dev <= bound)) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "eigenvalue deviation %.3e from oracle exceeds %.3e", dev, bound);
        v.issues.push_back(buf);
      }
      report.max_deviation = std::max(report.max_deviation, dev);
    }
    if (std::isnan(v.max_residual) || std::isnan(report.max_residual)) {
      report.max_residual = std::numeric_limits<double>::quiet_NaN();
    } else {
      report.max_residual = std::max(report.max_residual, v.max_residual);
    }
    report.entries.push_back(std::move(v));
  }
  return report;
}

std::string report_to_json(const RunReport& r) {
  json j;
  j["mode"] = std::string(to_string(r.mode));
  j["plan"] = json{{"mode", std::string(to_string(r.plan.mode))},
                   {"p0", r.plan.p0},
                   {"chunks", r.plan.chunks},
                   {"seed", r.plan.seed},
                   {"solver", solver_json(r.plan.solver)}};
  j["sort"] = json{{"fft_seconds", r.sort.fft_seconds},
                   {"greedy_seconds", r.sort.greedy_seconds},
                   {"total_seconds", r.sort.total_seconds()}};
  const auto& a = r.aggregates;
  j["aggregates"] = json{{"mean_wall_seconds", a.mean_wall_seconds},
                         {"mean_time_with_sort", a.mean_time_with_sort},
                         {"mean_iterations", a.mean_iterations},
                         {"mean_matvecs", a.mean_matvecs},
                         {"mean_flops", a.mean_flops},
                         {"failures", a.failures}};
  j["order"] = r.order.permutation;
  json results = json::array();
  for (const auto& x : r.results) {
    results.push_back(json{{"index", x.index},
                           {"id", x.id},
                           {"n", x.n},
                           {"origin", x.origin == WarmOrigin::previous ? "previous" : "random"},
                           {"iterations", x.record.iterations},
                           {"matvecs", x.record.matvecs},
                           {"rr_matvecs", x.record.rr_matvecs},
                           {"filter_flops_estimate", x.record.filter_flops_estimate},
                           {"wall_seconds", x.record.wall_seconds},
                           {"residual_max", std::isfinite(x.record.worst_residual) ? json(x.record.worst_residual)
                                                                                    : json(nullptr)},
                           {"converged", x.record.converged && !x.failed},
                           {"status", x.record.status},
                           {"edge", std::string(to_string(x.record.edge))},
                           {"locked_history", x.record.locked_history},
                           {"error", x.error}});
  }
  j["results"] = results;
  return j.dump(2) + "\n";
}

std::string comparison_to_json(const ComparisonTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back(json{{"mode", std::string(to_string(r.mode))},
                        {"mean_time", r.mean_time},
                        {"mean_iterations", r.mean_iterations},
                        {"mean_matvecs", r.mean_matvecs},
                        {"mean_flops", r.mean_flops},
                        {"speedup", r.speedup},
                        {"failures", r.failures}});
  }
  return json{{"rows", rows}}.dump(2) + "\n";
}

}  // namespace eigenforge
