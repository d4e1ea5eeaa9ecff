#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Thin FFTW wrapper with a plan cache. Plans are created with FFTW_ESTIMATE
// and FFTW_UNALIGNED so any std::vector storage may be passed in.
namespace errsense::fft {

// One-sided DFT of a real sequence: n/2 + 1 bins, unnormalised.
std::vector<std::complex<double>> real_forward(std::span<const double> x);

// Inverse of real_forward for a length-n sequence, including the 1/n factor.
std::vector<double> real_inverse(std::span<const std::complex<double>> spectrum, std::size_t n);

// Smallest integer >= n whose only prime factors are 2, 3 and 5.
std::size_t good_size(std::size_t n);

} // namespace errsense::fft
