#include "errsense/error.hpp"
#include "errsense/features.hpp"
#include "errsense/fir.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace errsense {

namespace {

// Bandpass for QRS energy; the transition widens on short inputs so the
// kernel still fits inside the signal.
std::vector<double> qrs_band(std::span<const double> x, double rate_hz, const RPeakOptions& o) {
  double transition = 2.0;
  const double min_transition = 3.3 * rate_hz / static_cast<double>(x.size() > 3 ? x.size() - 2 : 1);
  transition = std::max(transition, min_transition);
  const double max_transition = std::min(o.band_low_hz, rate_hz / 2.0 - o.band_high_hz);
  if (transition > max_transition) {
    return {};
  }
  const auto kernel = design_fir_bandpass(o.band_low_hz, o.band_high_hz, transition, transition, rate_hz);
  if (kernel.size() >= x.size()) {
    return {};
  }
  return filter_zero_phase(x, kernel.taps);
}

} // namespace

RrSeries rr_from_peaks(std::vector<double> peak_times_s) {
  RrSeries rr;
  rr.peak_times_s = std::move(peak_times_s);
  for (std::size_t i = 1; i < rr.peak_times_s.size(); ++i) {
    rr.intervals_ms.push_back((rr.peak_times_s[i] - rr.peak_times_s[i - 1]) * 1000.0);
  }
  return rr;
}

RrSeries detect_r_peaks(const SampledSignal& ecg, const RPeakOptions& o) {
  if (ecg.n_channels() != 1) {
    throw ParameterError("R-peak detection expects a single ECG channel");
  }
  const auto& x = ecg.samples[0];
  const std::size_t n = x.size();
  const double rate = ecg.rate_hz;
  const auto band = qrs_band(x, rate, o);
  if (band.empty()) {
    return {};
  }

  // Five-point derivative, squared.
  std::vector<double> sq(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double d = (2.0 * band[i + 1] + band[i + 2] - band[i - 2] - 2.0 * band[i - 1]) * rate / 8.0;
    sq[i] = d * d;
  }

  // Centred moving-window integration, so detections line up with the QRS.
  const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(o.integration_ms / 1000.0 * rate)));
  const std::size_t half = width / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sq[i];
  std::vector<double> mwi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, lo + width);
    mwi[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(width);
  }

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (mwi[i] > 0.0 && mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1]) candidates.push_back(i);
  }
  if (candidates.empty()) {
    return {};
  }

  const auto learn_end = std::min(n, static_cast<std::size_t>(2.0 * rate));
  const double learn_max = *std::max_element(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn_end));
  if (!(learn_max > 0.0)) {
    return {};
  }
  std::deque<double> history{learn_max};
  auto threshold = [&] {
    return o.threshold_fraction * std::accumulate(history.begin(), history.end(), 0.0) /
           static_cast<double>(history.size());
  };
  auto remember = [&](double height) {
    history.push_back(height);
    while (history.size() > o.threshold_history) history.pop_front();
  };

  const auto refractory = static_cast<std::size_t>(std::llround(o.refractory_ms / 1000.0 * rate));
  std::vector<std::size_t> detections;
  std::size_t c = 0;
  while (c < candidates.size()) {
    const std::size_t i = candidates[c];
    if (!detections.empty() && i - detections.back() < refractory) {
      // A larger peak inside the refractory period wins over the earlier one.
      if (mwi[i] > mwi[detections.back()]) {
        detections.back() = i;
        history.back() = mwi[i];
      }
      ++c;
      continue;
    }
    // Search back over a long silence with half the threshold.
    if (detections.size() >= 2) {
      const double mean_rr = static_cast<double>(detections.back() - detections.front()) /
                             static_cast<double>(detections.size() - 1);
      if (static_cast<double>(i - detections.back()) > 1.66 * mean_rr) {
        std::size_t best = 0;
        double best_h = 0.5 * threshold();
        for (std::size_t j = 0; j < c; ++j) {
          const std::size_t cand = candidates[j];
          if (cand > detections.back() + refractory && cand + refractory <= i && mwi[cand] > best_h) {
            best = cand;
            best_h = mwi[cand];
          }
        }
        if (best != 0) {
          detections.push_back(best);
          remember(mwi[best]);
          continue;
        }
      }
    }
    if (mwi[i] >= threshold()) {
      detections.push_back(i);
      remember(mwi[i]);
    }
    ++c;
  }

  const auto search = static_cast<std::size_t>(std::llround(o.search_ms / 1000.0 * rate));
  std::vector<double> peak_times;
  for (std::size_t d : detections) {
    const std::size_t lo = d >= search ? d - search : 0;
    const std::size_t hi = std::min(n - 1, d + search);
    std::size_t best = lo;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (x[j] > x[best]) best = j;
    }
    const double t = ecg.start_epoch_s + static_cast<double>(best) / rate;
    if (peak_times.empty() || t > peak_times.back()) peak_times.push_back(t);
  }
  return rr_from_peaks(std::move(peak_times));
}

RrMetrics rr_metrics(std::span<const double> intervals_ms) {
  if (intervals_ms.size() < 2) {
    throw DegenerateInputError("RR metrics need at least two intervals");
  }
  const double n = static_cast<double>(intervals_ms.size());
  double mean = 0.0;
  for (double v : intervals_ms) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : intervals_ms) ss += (v - mean) * (v - mean);
  RrMetrics m;
  m.mean_rr_ms = mean;
  m.sdnn_ms = std::sqrt(ss / (n - 1.0));
  m.cv = m.sdnn_ms / mean;
  return m;
}

EcgStats ecg_stats(std::span<const double> x) {
  const Moments m = stat_moments(x);
  return {m.mean, std::sqrt(m.variance), m.skewness, m.kurtosis};
}

} // namespace errsense
