#pragma once

#include "errsense/fir.hpp"
#include "errsense/signal.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace errsense {

// x[c][n] -> x[c][n] - mean_c x[c][n]. Needs at least two channels.
SampledSignal average_rereference(const SampledSignal& eeg);

// Subtracts each channel's whole-signal mean.
SampledSignal baseline_correct(const SampledSignal& signal);

// Soft-threshold wavelet denoising at the universal threshold
// sigma * sqrt(2 ln N), sigma = median(|d1|) / 0.6745. The signal is
// reflection padded to a multiple of 2^levels and trimmed back.
// threshold_scale multiplies the threshold (0 disables shrinkage).
std::vector<double> dwt_denoise(std::span<const double> x, std::size_t levels, double threshold_scale = 1.0);
SampledSignal dwt_denoise(const SampledSignal& ecg, std::size_t levels, double threshold_scale = 1.0);

// Gaze --------------------------------------------------------------------

enum class GazeLabel { fixation, saccade, gap };

struct GazeLabelTrace {
  std::vector<GazeLabel> labels;
  std::vector<double> velocity_dps; // NaN where undefined
};

// v[n] = |p[n+k] - p[n-k]| / (2k / rate) with k = max(1, round(window * rate / 2)).
// Undefined (NaN) within k samples of either end or when a neighbour is missing.
std::vector<double> three_point_velocity(const SampledSignal& gaze, double window_ms = 20.0);

// Saccade where velocity >= threshold, fixation below it, gap where undefined.
GazeLabelTrace ivt_classify(const SampledSignal& gaze, double velocity_threshold_dps = 30.0, double window_ms = 20.0);

// Per-channel running median over the non-missing samples of each window;
// the first and last kernel/2 samples pass through. Throws ParameterError
// for an even kernel.
SampledSignal median_smooth_gaze(const SampledSignal& gaze, std::size_t kernel = 3);

// Fills interior gaps strictly shorter than max_gap_ms with the last valid
// sample before the gap. Leading gaps and longer gaps stay missing.
SampledSignal interpolate_gaps_constant(const SampledSignal& gaze, double max_gap_ms = 75.0);

// Pupil -------------------------------------------------------------------

struct Gap {
  std::size_t first{0};
  std::size_t length{0};
};

struct PupilCleanResult {
  SampledSignal pupil;
  std::vector<std::size_t> artifact_samples; // indices marked by the rate check
  std::vector<Gap> blink_candidates;         // gaps left unfilled
};

struct PupilCleanOptions {
  std::size_t first_median{3};
  double max_rate_mm_per_s{1.0};
  std::size_t second_median{5};
  double max_spline_gap_ms{200.0};
};

// Median(3) -> mark |dx/dt| > 1 mm/s missing -> median(5) -> natural cubic
// spline through the valid samples to fill gaps shorter than 200 ms.
PupilCleanResult clean_pupil(const SampledSignal& pupil, const PupilCleanOptions& options = {});

// Maximal runs of NaN samples.
std::vector<Gap> find_gaps(std::span<const double> x);

// Natural cubic spline through (xs, ys) evaluated at the query points.
// xs must be strictly increasing and hold at least two points.
std::vector<double> natural_cubic_spline(std::span<const double> xs, std::span<const double> ys,
                                         std::span<const double> query);

// Whole-stream chains ------------------------------------------------------

struct PreprocessConfig {
  double eeg_low_hz{0.5};
  double eeg_high_hz{50.0};
  double eeg_transition_low_hz{0.1};
  double eeg_transition_high_hz{0.5};
  double ecg_low_hz{0.5};
  double ecg_high_hz{40.0};
  double ecg_transition_low_hz{0.1};
  double ecg_transition_high_hz{0.5};
  std::size_t ecg_wavelet_levels{4};
  double ivt_threshold_dps{30.0};
  double velocity_window_ms{20.0};
  std::size_t gaze_median_kernel{3};
  double gaze_max_gap_ms{75.0};
  PupilCleanOptions pupil{};
};

// Bandpass -> average re-reference -> whole-signal mean subtraction.
SampledSignal preprocess_eeg(const SampledSignal& eeg, const PreprocessConfig& cfg);
// Bandpass -> wavelet denoising.
SampledSignal preprocess_ecg(const SampledSignal& ecg, const PreprocessConfig& cfg);
// Median smoothing -> short-gap interpolation.
SampledSignal preprocess_gaze(const SampledSignal& gaze, const PreprocessConfig& cfg);

} // namespace errsense
