#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace errsense {

// Multi-level orthogonal DWT with periodic boundary handling, Daubechies
// family with 4 vanishing moments (8 taps). details[0] is the finest level.
struct WaveletDecomposition {
  std::vector<std::vector<double>> details;
  std::vector<double> approximation;
  std::size_t length{0};
};

// Requires x.size() to be a multiple of 2^levels (LengthError otherwise).
WaveletDecomposition dwt_forward(std::span<const double> x, std::size_t levels);
std::vector<double> dwt_inverse(const WaveletDecomposition& d);

// Decomposition-lowpass coefficients of db4.
std::span<const double> db4_lowpass();

} // namespace errsense
