#include "errsense/preprocess.hpp"

#include "errsense/error.hpp"
#include "errsense/wavelet.hpp"

#include <algorithm>
#include <cmath>

namespace errsense {

namespace {

SampledSignal like(const SampledSignal& s) {
  SampledSignal out;
  out.channel_labels = s.channel_labels;
  out.rate_hz = s.rate_hz;
  out.start_epoch_s = s.start_epoch_s;
  return out;
}

double median_abs(std::vector<double> v) {
  for (double& x : v) x = std::abs(x);
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

} // namespace

SampledSignal average_rereference(const SampledSignal& eeg) {
  if (eeg.n_channels() < 2) {
    throw ParameterError("average re-reference needs at least two channels");
  }
  SampledSignal out = eeg;
  const std::size_t n = eeg.n_samples();
  const double inv = 1.0 / static_cast<double>(eeg.n_channels());
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& ch : eeg.samples) mean += ch[i];
    mean *= inv;
    for (auto& ch : out.samples) ch[i] -= mean;
  }
  return out;
}

SampledSignal baseline_correct(const SampledSignal& signal) {
  SampledSignal out = signal;
  for (auto& ch : out.samples) {
    if (ch.empty()) continue;
    double mean = 0.0;
    for (double v : ch) mean += v;
    mean /= static_cast<double>(ch.size());
    for (double& v : ch) v -= mean;
  }
  return out;
}

std::vector<double> dwt_denoise(std::span<const double> x, std::size_t levels, double threshold_scale) {
  const std::size_t n = x.size();
  const std::size_t block = std::size_t{1} << levels;
  if (levels == 0 || n < block) {
    throw LengthError("wavelet denoising with " + std::to_string(levels) + " levels needs at least " +
                      std::to_string(block) + " samples");
  }
  const std::size_t padded_len = (n + block - 1) / block * block;
  std::vector<double> padded(x.begin(), x.end());
  for (std::size_t i = 0; padded.size() < padded_len; ++i) {
    padded.push_back(x[n - 2 - i]);
  }
  auto d = dwt_forward(padded, levels);
  const double sigma = median_abs(d.details.front()) / 0.6745;
  const double threshold = threshold_scale * sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  if (threshold > 0.0) {
    for (auto& level : d.details) {
      for (double& c : level) c = soft_threshold(c, threshold);
    }
  }
  auto y = dwt_inverse(d);
  y.resize(n);
  return y;
}

SampledSignal dwt_denoise(const SampledSignal& ecg, std::size_t levels, double threshold_scale) {
  SampledSignal out = like(ecg);
  for (const auto& ch : ecg.samples) {
    out.samples.push_back(dwt_denoise(ch, levels, threshold_scale));
  }
  return out;
}

SampledSignal preprocess_eeg(const SampledSignal& eeg, const PreprocessConfig& cfg) {
  const auto kernel = design_fir_bandpass(cfg.eeg_low_hz, cfg.eeg_high_hz, cfg.eeg_transition_low_hz,
                                          cfg.eeg_transition_high_hz, eeg.rate_hz);
  return baseline_correct(average_rereference(apply_filter_zero_phase(eeg, kernel)));
}

SampledSignal preprocess_ecg(const SampledSignal& ecg, const PreprocessConfig& cfg) {
  const auto kernel = design_fir_bandpass(cfg.ecg_low_hz, cfg.ecg_high_hz, cfg.ecg_transition_low_hz,
                                          cfg.ecg_transition_high_hz, ecg.rate_hz);
  return dwt_denoise(apply_filter_zero_phase(ecg, kernel), cfg.ecg_wavelet_levels);
}

SampledSignal preprocess_gaze(const SampledSignal& gaze, const PreprocessConfig& cfg) {
  return interpolate_gaps_constant(median_smooth_gaze(gaze, cfg.gaze_median_kernel), cfg.gaze_max_gap_ms);
}

} // namespace errsense
