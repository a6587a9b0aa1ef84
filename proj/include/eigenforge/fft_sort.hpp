#pragma once

// Truncated-FFT signatures of coefficient fields and the greedy
// nearest-neighbour ordering of a problem sequence built on them.

#include <cstddef>
#include <span>
#include <vector>

#include "eigenforge/fft.hpp"
#include "eigenforge/operators.hpp"

namespace eigenforge {

/// Centered low-frequency crop of one or more field spectra. Each channel
/// is a p0 x p0 row-major block whose center (p0/2, p0/2) holds mode (0, 0).
struct LowFreqSignature {
  std::size_t p0 = 0;
  std::size_t channels = 1;
  std::vector<Complex> coeffs;

  const Complex& at(std::size_t channel, std::size_t row, std::size_t col) const {
    return coeffs[(channel * p0 + row) * p0 + col];
  }
  /// DC term of the given channel (sum of that field's entries).
  const Complex& dc(std::size_t channel = 0) const { return at(channel, p0 / 2, p0 / 2); }
};

struct SolveOrder {
  std::vector<std::size_t> permutation;

  std::size_t size() const { return permutation.size(); }
  friend bool operator==(const SolveOrder&, const SolveOrder&) = default;
};

/// True when `order` visits each of 0..n-1 exactly once.
bool is_permutation_of(const SolveOrder& order, std::size_t n);

/// fftshift followed by the central p0 x p0 crop: keeps signed frequencies
/// -p0/2 .. p0/2 - 1 on both axes. p0 must be even and <= p.
LowFreqSignature truncate_low_freq(const Spectrum2D& spectrum, std::size_t p0);

/// Channel-wise concatenation; all parts must share p0.
LowFreqSignature concat(std::span<const LowFreqSignature> parts);

/// Frobenius norm of the difference over all complex entries.
double signature_distance(const LowFreqSignature& a, const LowFreqSignature& b);

/// Greedy nearest-neighbour order over flat feature vectors (Euclidean
/// distance); starts at `start`, ties go to the lowest index. O(N^2 d).
SolveOrder greedy_order(std::span<const std::vector<double>> features, std::size_t start = 0);

/// Greedy order on signatures.
SolveOrder greedy_sort(std::span<const LowFreqSignature> signatures, std::size_t start = 0);

/// Greedy order on the raw field values (the untruncated baseline).
SolveOrder greedy_sort_fields(std::span<const ParameterField> fields, std::size_t start = 0);

struct SortResult {
  SolveOrder order;
  double fft_seconds = 0.0;
  double greedy_seconds = 0.0;

  double total_seconds() const { return fft_seconds + greedy_seconds; }
};

/// Default truncation side: 20, capped at p and rounded down to even.
std::size_t default_truncation(std::size_t p);

/// fft2d -> truncate_low_freq -> greedy_sort from index 0, timed per phase.
SortResult sort_problems(std::span<const ParameterField> fields, std::size_t p0);

/// Same for problem sets; multi-field problems use concatenated signatures.
SortResult sort_problem_set(std::span<const Problem> problems, std::size_t p0);

}  // namespace eigenforge
