#include "errsense/error.hpp"
#include "errsense/features.hpp"

#include <algorithm>
#include <cmath>

namespace errsense {

namespace {

enum class RunKind { none, saccade, sub_threshold };

} // namespace

GazeFeatures gaze_features(const SampledSignal& gaze_window, std::span<const double> velocity_dps,
                           double saccade_threshold_dps, double min_fixation_ms) {
  if (gaze_window.n_channels() < 2) {
    throw ParameterError("gaze window needs x and y channels");
  }
  const std::size_t n = gaze_window.n_samples();
  if (velocity_dps.size() != n) {
    throw ParameterError("velocity trace length does not match the gaze window");
  }
  const auto& gx = gaze_window.samples[0];
  const auto& gy = gaze_window.samples[1];

  double cx = 0.0, cy = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isnan(gx[i]) && !std::isnan(gy[i])) {
      cx += gx[i];
      cy += gy[i];
      ++valid;
    }
  }
  if (valid == 0) {
    throw DegenerateInputError("gaze window has no valid samples");
  }
  cx /= static_cast<double>(valid);
  cy /= static_cast<double>(valid);

  GazeFeatures f;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isnan(gx[i]) && !std::isnan(gy[i])) {
      ss += (gx[i] - cx) * (gx[i] - cx) + (gy[i] - cy) * (gy[i] - cy);
    }
  }
  f.gaze_dispersion_deg = std::sqrt(ss / static_cast<double>(valid));

  const double sample_ms = 1000.0 / gaze_window.rate_hz;
  double peak_sum = 0.0;
  RunKind kind = RunKind::none;
  std::size_t run_len = 0;
  double run_peak = 0.0;
  auto close_run = [&] {
    if (kind == RunKind::saccade) {
      f.saccade_count += 1.0;
      peak_sum += run_peak;
    } else if (kind == RunKind::sub_threshold) {
      const double duration = static_cast<double>(run_len) * sample_ms;
      if (duration >= min_fixation_ms - 1e-9) {
        f.fixation_count += 1.0;
        f.total_fixation_time_ms += duration;
      }
    }
    kind = RunKind::none;
    run_len = 0;
    run_peak = 0.0;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double v = velocity_dps[i];
    RunKind k = RunKind::none;
    if (!std::isnan(v)) {
      k = v > saccade_threshold_dps ? RunKind::saccade : RunKind::sub_threshold;
    }
    if (k != kind) {
      close_run();
      kind = k;
    }
    if (k != RunKind::none) {
      ++run_len;
      run_peak = std::max(run_peak, v);
    }
  }
  close_run();
  if (f.saccade_count > 0.0) f.mean_saccade_peak_velocity_dps = peak_sum / f.saccade_count;
  if (f.fixation_count > 0.0) f.mean_fixation_duration_ms = f.total_fixation_time_ms / f.fixation_count;
  return f;
}

BlinkFeatures blink_features(std::span<const double> pupil, double rate_hz, double min_ms, double max_ms) {
  BlinkFeatures b;
  double total = 0.0;
  for (const Gap& g : find_gaps(pupil)) {
    const double duration = static_cast<double>(g.length) / rate_hz * 1000.0;
    if (duration >= min_ms - 1e-9 && duration <= max_ms + 1e-9) {
      b.blink_count += 1.0;
      total += duration;
    }
  }
  if (b.blink_count > 0.0) b.mean_blink_duration_ms = total / b.blink_count;
  return b;
}

} // namespace errsense
