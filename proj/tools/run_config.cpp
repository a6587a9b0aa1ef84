#include "run_config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eigenforge/error.hpp"
#include "eigenforge/fft.hpp"

namespace eigenforge::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_unsigned(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw InvalidArgument("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::string fmt(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

}  // namespace

void RunConfig::merge_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string v = trim(t.substr(eq + 1));
    if (key == "family") family = v;
    else if (key == "nx") nx = parse_unsigned<std::size_t>(key, v);
    else if (key == "ny") ny = parse_unsigned<std::size_t>(key, v);
    else if (key == "lx") lx = parse_double(key, v);
    else if (key == "ly") ly = parse_double(key, v);
    else if (key == "n_problems") n_problems = parse_unsigned<std::size_t>(key, v);
    else if (key == "master_seed") master_seed = parse_unsigned<std::uint64_t>(key, v);
    else if (key == "tau") tau = parse_double(key, v);
    else if (key == "alpha") alpha = parse_double(key, v);
    else if (key == "field_side") field_side = parse_unsigned<std::size_t>(key, v);
    else if (key == "L") L = parse_unsigned<std::size_t>(key, v);
    else if (key == "tol") tol = parse_double(key, v);
    else if (key == "m") m = static_cast<int>(parse_unsigned<unsigned>(key, v));
    else if (key == "p0") p0 = parse_unsigned<std::size_t>(key, v);
    else if (key == "extra") extra = v == "auto" ? std::nullopt : std::optional(parse_unsigned<std::size_t>(key, v));
    else if (key == "max_iters") max_iters = parse_unsigned<std::size_t>(key, v);
    else if (key == "stall_iters") stall_iters = parse_unsigned<std::size_t>(key, v);
    else if (key == "mode") mode = v;
    else if (key == "chunks") chunks = parse_unsigned<std::size_t>(key, v);
    else if (key == "out") out = v;
    else if (key == "repeat") repeat = parse_unsigned<std::size_t>(key, v);
    else if (key == "oracle_cap") oracle_cap = parse_unsigned<std::size_t>(key, v);
    else if (key == "store_vectors") store_vectors = parse_bool(key, v);
    else throw InvalidArgument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "family = " << family << "\n"
     << "nx = " << nx << "\n"
     << "ny = " << ny << "\n"
     << "lx = " << fmt(lx) << "\n"
     << "ly = " << fmt(ly) << "\n"
     << "n_problems = " << n_problems << "\n"
     << "master_seed = " << master_seed << "\n"
     << "tau = " << fmt(tau) << "\n"
     << "alpha = " << fmt(alpha) << "\n"
     << "field_side = " << field_side << "\n"
     << "L = " << L << "\n"
     << "tol = " << fmt(tol) << "\n"
     << "m = " << m << "\n"
     << "p0 = " << p0 << "\n"
     << "extra = " << (extra ? std::to_string(*extra) : std::string("auto")) << "\n"
     << "max_iters = " << max_iters << "\n"
     << "stall_iters = " << stall_iters << "\n"
     << "mode = " << mode << "\n"
     << "chunks = " << chunks << "\n"
     << "out = " << out << "\n"
     << "repeat = " << repeat << "\n"
     << "oracle_cap = " << oracle_cap << "\n"
     << "store_vectors = " << (store_vectors ? "true" : "false") << "\n";
  return os.str();
}

void RunConfig::apply_environment() {
  if (const char* s = std::getenv("EIGENFORGE_SEED"); s != nullptr && *s != '\0') {
    master_seed = parse_unsigned<std::uint64_t>("EIGENFORGE_SEED", s);
  }
}

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  if (!r.extra) r.extra = default_extra(L);
  if (r.field_side == 0 && nx >= 2 && ny >= 2) r.field_side = default_field_side(grid());
  return r;
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.L = L;
  s.extra = extra ? *extra : default_extra(L);
  s.m = m;
  s.tol = tol;
  s.max_iters = max_iters;
  s.stall_iters = stall_iters;
  return s;
}

void RunConfig::validate() const {
  family_tag();
  mode_tag();
  grid().validate();
  if (n_problems == 0) throw InvalidArgument("config: n_problems must be >= 1");
  if (L == 0) throw InvalidArgument("config: L must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("config: tol must be > 0");
  if (m < 1) throw InvalidArgument("config: m must be >= 1");
  if (p0 == 0 || p0 % 2 != 0) throw InvalidArgument("config: p0 must be even and >= 2");
  if (chunks == 0) throw InvalidArgument("config: chunks must be >= 1");
  if (repeat == 0) throw InvalidArgument("config: repeat must be >= 1");
  if (field_side != 0 && !is_power_of_two(field_side)) {
    throw InvalidArgument("config: field_side must be a power of two");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  RunConfig cfg;
  cfg.merge_text(ss.str());
  return cfg;
}

}  // namespace eigenforge::cli
