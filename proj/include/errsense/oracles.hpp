#pragma once

#include "errsense/features.hpp"
#include "errsense/fir.hpp"
#include "errsense/learn.hpp"

#include <span>
#include <vector>

// Slow, direct reference computations used to check the fast kernels.
// None of them call into the code they check.
namespace errsense::oracle {

// Hann-tapered periodogram by an O(N^2) DFT, summed over the EEG bands.
BandPowers dft_band_powers(std::span<const double> x, double rate_hz);

// Textbook ApEn with explicit template comparison loops.
double naive_apen(std::span<const double> x, std::size_t m, double r_factor);

// |H(f)| in dB by direct DTFT.
double dtft_gain_db(std::span<const double> taps, double f_hz, double rate_hz);

struct FilterResponse {
  double max_passband_deviation_db{0.0};
  double max_stopband_gain_db{-1e300};
  std::size_t probes{0};
};

// Probes `n` evenly spaced frequencies on [0, rate/2]. Passband is
// [low + tl/2, high - th/2], stopbands [0, low - tl/2] and [high + th/2, rate/2].
FilterResponse probe_filter(const FirKernel& kernel, std::size_t n = 1000);

// Lag in samples (within +-max_lag) maximising the cross-correlation of a
// filtered band-interior sine with the input, on the middle half.
int zero_phase_lag(std::span<const double> taps, double f_hz, double rate_hz, std::size_t n, int max_lag = 20);

// Two-sided Student t tail by composite Simpson integration of the density.
double t_two_sided_p(double t, double df);

// Largest |analytic - numeric| / max(1e-7, |analytic| + |numeric|) over all
// weights and biases, numeric by central differences with step h.
double mlp_gradient_error(MlpModel m, const Matrix& Xs, const Labels& y, double l2, double h = 1e-5);

} // namespace errsense::oracle
