#pragma once

// Radix-2 Cooley-Tukey transforms on square power-of-two grids.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eigenforge {

using Complex = std::complex<double>;

/// Row-major p x p complex array.
struct Spectrum2D {
  std::size_t p = 0;
  std::vector<Complex> values;

  Complex& at(std::size_t row, std::size_t col) { return values[row * p + col]; }
  const Complex& at(std::size_t row, std::size_t col) const { return values[row * p + col]; }
};

bool is_power_of_two(std::size_t x);

/// In-place 1D transform; `inverse` flips the twiddle sign, no 1/p scaling.
void fft1d(std::span<Complex> data, bool inverse);

/// Unnormalized forward 2D DFT of a row-major p x p real field.
Spectrum2D fft2d(std::span<const double> field, std::size_t p);

/// Unnormalized inverse 2D DFT (divide by p^2 to invert fft2d).
Spectrum2D ifft2d(const Spectrum2D& spectrum);

/// Signed frequency of FFT bin `k` on a length-p axis: k for k < p/2, else k - p.
inline long signed_frequency(std::size_t k, std::size_t p) {
  return k < p / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(p);
}

}  // namespace eigenforge
