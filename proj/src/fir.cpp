#include "errsense/fir.hpp"

#include "errsense/error.hpp"
#include "errsense/fft.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace errsense {

namespace {

double sinc(double x) {
  if (x == 0.0) {
    return 1.0;
  }
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::vector<double> lowpass_taps(std::size_t n_taps, double cutoff_hz, double rate_hz) {
  const double fc = cutoff_hz / rate_hz;
  const double centre = static_cast<double>(n_taps - 1) / 2.0;
  std::vector<double> h(n_taps);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_taps; ++i) {
    const double m = static_cast<double>(i) - centre;
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                             static_cast<double>(n_taps - 1));
    h[i] = 2.0 * fc * sinc(2.0 * fc * m) * w;
    sum += h[i];
  }
  for (double& v : h) {
    v /= sum;
  }
  return h;
}

} // namespace

std::size_t hamming_tap_count(double rate_hz, double transition_hz) {
  auto n = static_cast<std::size_t>(std::ceil(3.3 * rate_hz / transition_hz - 1e-9));
  if (n % 2 == 0) ++n;
  return std::max<std::size_t>(n, 3);
}

FirKernel design_fir_bandpass(double low_hz, double high_hz, double transition_low_hz,
                              double transition_high_hz, double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw ParameterError("rate must be positive");
  }
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < rate_hz / 2.0)) {
    throw ParameterError("band edges must satisfy 0 < low < high < rate/2");
  }
  if (!(transition_low_hz > 0.0 && transition_high_hz > 0.0)) {
    throw ParameterError("transition bandwidths must be positive");
  }
  const std::size_t n = hamming_tap_count(rate_hz, std::min(transition_low_hz, transition_high_hz));
  const auto hi = lowpass_taps(n, high_hz, rate_hz);
  const auto lo = lowpass_taps(n, low_hz, rate_hz);
  FirKernel k;
  k.design = {low_hz, high_hz, transition_low_hz, transition_high_hz, rate_hz};
  k.taps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    k.taps[i] = hi[i] - lo[i];
  }
  // Exact symmetry; the two halves can differ in the last ulp otherwise.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double avg = 0.5 * (k.taps[i] + k.taps[n - 1 - i]);
    k.taps[i] = avg;
    k.taps[n - 1 - i] = avg;
  }
  return k;
}

double fir_gain_db(std::span<const double> taps, double f_hz, double rate_hz) {
  const double w = 2.0 * std::numbers::pi * f_hz / rate_hz;
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    re += taps[i] * std::cos(w * static_cast<double>(i));
    im -= taps[i] * std::sin(w * static_cast<double>(i));
  }
  return 10.0 * std::log10(re * re + im * im + 1e-300);
}

std::vector<double> filter_zero_phase(std::span<const double> x, std::span<const double> taps) {
  const std::size_t n = x.size();
  const std::size_t k = taps.size();
  if (n <= k) {
    throw LengthError("signal of " + std::to_string(n) + " samples is not longer than the " + std::to_string(k) +
                      "-tap kernel");
  }
  // Reflection padding without repeating the edge sample.
  const std::size_t padded_len = n + 2 * k;
  const std::size_t fft_len = fft::good_size(std::max(padded_len, 2 * k));
  std::vector<double> padded(fft_len, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    padded[i] = x[k - i];
    padded[k + n + i] = x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(k));

  // Filtering forward then backward with h equals circular convolution with
  // the autocorrelation of h, whose spectrum is |H|^2. For output indices in
  // [k, k + n) the support never wraps, so the result matches the linear
  // forward-backward pass exactly.
  std::vector<double> h(fft_len, 0.0);
  std::copy(taps.begin(), taps.end(), h.begin());
  const auto hf = fft::real_forward(h);
  auto xf = fft::real_forward(padded);
  for (std::size_t i = 0; i < xf.size(); ++i) {
    xf[i] *= std::norm(hf[i]);
  }
  const auto y = fft::real_inverse(xf, fft_len);
  return {y.begin() + static_cast<std::ptrdiff_t>(k), y.begin() + static_cast<std::ptrdiff_t>(k + n)};
}

SampledSignal apply_filter_zero_phase(const SampledSignal& signal, const FirKernel& kernel) {
  SampledSignal out;
  out.channel_labels = signal.channel_labels;
  out.rate_hz = signal.rate_hz;
  out.start_epoch_s = signal.start_epoch_s;
  out.samples.reserve(signal.n_channels());
  for (const auto& ch : signal.samples) {
    out.samples.push_back(filter_zero_phase(ch, kernel.taps));
  }
  return out;
}

} // namespace errsense
