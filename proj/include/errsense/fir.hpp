#pragma once

#include "errsense/signal.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace errsense {

struct FirDesign {
  double low_hz{0.0};
  double high_hz{0.0};
  double transition_low_hz{0.0};
  double transition_high_hz{0.0};
  double rate_hz{0.0};
};

// Linear-phase Hamming-windowed sinc kernel. taps.size() is odd and the taps
// are symmetric about the centre.
struct FirKernel {
  std::vector<double> taps;
  FirDesign design;

  std::size_t size() const { return taps.size(); }
};

// Smallest odd integer >= 3.3 * rate / transition (Hamming transition rule).
std::size_t hamming_tap_count(double rate_hz, double transition_hz);

// Bandpass as the difference of two unit-DC lowpass kernels with cutoffs at
// low_hz and high_hz. The tap count follows the narrower transition band.
// Throws ParameterError unless 0 < low < high < rate/2 and transitions > 0.
FirKernel design_fir_bandpass(double low_hz, double high_hz, double transition_low_hz,
                              double transition_high_hz, double rate_hz);

// Magnitude response in dB, by direct evaluation of the DTFT sum.
double fir_gain_db(std::span<const double> taps, double f_hz, double rate_hz);

// Forward-backward application: the magnitude response is squared and the
// net phase is zero. Both ends are reflection padded by the kernel length.
// Throws LengthError unless x is longer than the kernel.
std::vector<double> filter_zero_phase(std::span<const double> x, std::span<const double> taps);

SampledSignal apply_filter_zero_phase(const SampledSignal& signal, const FirKernel& kernel);

} // namespace errsense
