#include "eigenforge/fft.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include "eigenforge/error.hpp"

namespace eigenforge {

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

namespace {

// exp(-2 pi i k / n) for k < n / 2, cached per length.
const std::vector<Complex>& twiddles(std::size_t n) {
  thread_local std::map<std::size_t, std::vector<Complex>> cache;
  auto& t = cache[n];
  if (t.empty()) {
    t.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      t[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
  }
  return t;
}

}  // namespace

void fft1d(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw InvalidArgument("fft1d: length " + std::to_string(n) + " is not a power of two");
  if (n == 1) return;

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  // Twiddles computed directly rather than by repeated multiplication to
  // keep the error at O(eps log n); the table for the largest stage serves
  // every stage via stride.
  const std::vector<Complex>& table = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex w = inverse ? std::conj(table[k * stride]) : table[k * stride];
        const Complex u = data[start + k];
        const Complex x = data[start + k + half];
        // Written out: operator* on std::complex goes through the NaN-aware libcall.
        const Complex v(x.real() * w.real() - x.imag() * w.imag(), x.real() * w.imag() + x.imag() * w.real());
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

namespace {

void transform_2d(Spectrum2D& s, bool inverse) {
  const std::size_t p = s.p;
  for (std::size_t r = 0; r < p; ++r) fft1d(std::span<Complex>(s.values.data() + r * p, p), inverse);
  std::vector<Complex> column(p);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t r = 0; r < p; ++r) column[r] = s.at(r, c);
    fft1d(column, inverse);
    for (std::size_t r = 0; r < p; ++r) s.at(r, c) = column[r];
  }
}

}  // namespace

Spectrum2D fft2d(std::span<const double> field, std::size_t p) {
  if (!is_power_of_two(p)) throw InvalidArgument("fft2d: side " + std::to_string(p) + " is not a power of two");
  if (field.size() != p * p) throw DimensionMismatch("fft2d: field is not p x p");
  Spectrum2D s{p, std::vector<Complex>(field.begin(), field.end())};
  transform_2d(s, false);
  return s;
}

Spectrum2D ifft2d(const Spectrum2D& spectrum) {
  if (!is_power_of_two(spectrum.p)) throw InvalidArgument("ifft2d: side is not a power of two");
  Spectrum2D s = spectrum;
  transform_2d(s, true);
  return s;
}

}  // namespace eigenforge
