#include "eigenforge/fft_sort.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "eigenforge/error.hpp"

namespace eigenforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> flatten(const LowFreqSignature& s) {
  std::vector<double> out;
  out.reserve(2 * s.coeffs.size());
  for (const Complex& c : s.coeffs) {
    out.push_back(c.real());
    out.push_back(c.imag());
  }
  return out;
}

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= d; i += 2) {
    const double x = a[i] - b[i];
    const double y = a[i + 1] - b[i + 1];
    s0 += x * x;
    s1 += y * y;
  }
  for (; i < d; ++i) s0 += (a[i] - b[i]) * (a[i] - b[i]);
  return s0 + s1;
}

}  // namespace

bool is_permutation_of(const SolveOrder& order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t i : order.permutation) {
    if (i >= n || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

LowFreqSignature truncate_low_freq(const Spectrum2D& spectrum, std::size_t p0) {
  const std::size_t p = spectrum.p;
  if (p0 > p) {
    throw InvalidArgument("truncate_low_freq: p0 = " + std::to_string(p0) + " exceeds p = " +
                          std::to_string(p));
  }
  if (p0 == 0 || p0 % 2 != 0) throw InvalidArgument("truncate_low_freq: p0 must be even and > 0");
  LowFreqSignature sig{p0, 1, std::vector<Complex>(p0 * p0)};
  const long half = static_cast<long>(p0 / 2);
  for (long fr = -half; fr < half; ++fr) {
    const std::size_t src_r = static_cast<std::size_t>((fr + static_cast<long>(p)) % static_cast<long>(p));
    for (long fc = -half; fc < half; ++fc) {
      const std::size_t src_c = static_cast<std::size_t>((fc + static_cast<long>(p)) % static_cast<long>(p));
      sig.coeffs[static_cast<std::size_t>(fr + half) * p0 + static_cast<std::size_t>(fc + half)] =
          spectrum.at(src_r, src_c);
    }
  }
  return sig;
}

LowFreqSignature concat(std::span<const LowFreqSignature> parts) {
  if (parts.empty()) throw InvalidArgument("concat: no signatures");
  LowFreqSignature out{parts[0].p0, 0, {}};
  for (const auto& s : parts) {
    if (s.p0 != out.p0) throw DimensionMismatch("concat: mismatched p0");
    out.channels += s.channels;
    out.coeffs.insert(out.coeffs.end(), s.coeffs.begin(), s.coeffs.end());
  }
  return out;
}

double signature_distance(const LowFreqSignature& a, const LowFreqSignature& b) {
  if (a.p0 != b.p0 || a.coeffs.size() != b.coeffs.size()) {
    throw DimensionMismatch("signature_distance: mismatched p0 (" + std::to_string(a.p0) + " vs " +
                            std::to_string(b.p0) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) s += std::norm(a.coeffs[i] - b.coeffs[i]);
  return std::sqrt(s);
}

SolveOrder greedy_order(std::span<const std::vector<double>> features, std::size_t start) {
  const std::size_t n = features.size();
  SolveOrder order;
  if (n == 0) return order;
  if (start >= n) throw InvalidArgument("greedy_order: start index out of range");
  const std::size_t d = features[0].size();
  for (const auto& f : features) {
    if (f.size() != d) throw DimensionMismatch("greedy_order: feature length mismatch");
  }

  // Remaining indices kept in ascending order so strict '<' breaks ties low.
  std::vector<std::size_t> remaining;
  remaining.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (i != start) remaining.push_back(i);
  order.permutation.reserve(n);
  order.permutation.push_back(start);
  std::size_t current = start;
  while (!remaining.empty()) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_pos = 0;
    const double* cur = features[current].data();
    for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
      const double dist = squared_distance(cur, features[remaining[pos]].data(), d);
      if (dist < best) {
        best = dist;
        best_pos = pos;
      }
    }
    current = remaining[best_pos];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
    order.permutation.push_back(current);
  }
  return order;
}

SolveOrder greedy_sort(std::span<const LowFreqSignature> signatures, std::size_t start) {
  std::vector<std::vector<double>> features;
  features.reserve(signatures.size());
  for (const auto& s : signatures) {
    if (s.p0 != signatures[0].p0 || s.coeffs.size() != signatures[0].coeffs.size()) {
      throw DimensionMismatch("greedy_sort: signatures differ in shape");
    }
    features.push_back(flatten(s));
  }
  return greedy_order(features, start);
}

SolveOrder greedy_sort_fields(std::span<const ParameterField> fields, std::size_t start) {
  std::vector<std::vector<double>> features;
  features.reserve(fields.size());
  for (const auto& f : fields) features.push_back(f.values);
  return greedy_order(features, start);
}

std::size_t default_truncation(std::size_t p) {
  std::size_t p0 = std::min<std::size_t>(20, p);
  if (p0 % 2 != 0) --p0;
  return std::max<std::size_t>(p0, 2);
}

SortResult sort_problems(std::span<const ParameterField> fields, std::size_t p0) {
  if (fields.empty()) throw InvalidArgument("sort_problems: no fields");
  SortResult result;
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> features;
  features.reserve(fields.size());
  for (const auto& f : fields) {
    if (f.p != fields[0].p) throw DimensionMismatch("sort_problems: fields differ in p");
    features.push_back(flatten(truncate_low_freq(fft2d(f.values, f.p), p0)));
  }
  result.fft_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  result.order = greedy_order(features, 0);
  result.greedy_seconds = seconds_since(t1);
  return result;
}

SortResult sort_problem_set(std::span<const Problem> problems, std::size_t p0) {
  if (problems.empty()) throw InvalidArgument("sort_problem_set: no problems");
  SortResult result;
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> features;
  features.reserve(problems.size());
  for (const auto& prob : problems) {
    std::vector<LowFreqSignature> parts;
    for (const auto& f : prob.spec.fields) {
      if (f.p != problems[0].spec.fields[0].p) throw DimensionMismatch("sort_problem_set: fields differ in p");
      parts.push_back(truncate_low_freq(fft2d(f.values, f.p), std::min(p0, f.p)));
    }
    features.push_back(flatten(concat(parts)));
  }
  result.fft_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  result.order = greedy_order(features, 0);
  result.greedy_seconds = seconds_since(t1);
  return result;
}

}  // namespace eigenforge
