#pragma once

#include "errsense/preprocess.hpp"
#include "errsense/signal.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace errsense {

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  Modality modality{Modality::eeg};
};

// EEG ---------------------------------------------------------------------

struct BandPowers {
  double delta{0.0}; // [1, 4) Hz
  double theta{0.0}; // [4, 8) Hz
  double alpha{0.0}; // [8, 12) Hz
  double beta{0.0};  // [12, 30) Hz
  double gamma{0.0}; // [30, 50) Hz

  std::array<double, 5> as_array() const { return {delta, theta, alpha, beta, gamma}; }
};

inline constexpr std::array<std::array<double, 2>, 5> kEegBands = {
    {{1.0, 4.0}, {4.0, 8.0}, {8.0, 12.0}, {12.0, 30.0}, {30.0, 50.0}}};

// One-sided Hann periodogram, PSD[k] = c_k |X_k|^2 / (rate * sum w^2) with
// c_k = 2 except at DC and Nyquist. Units are signal^2 / Hz.
std::vector<double> hann_periodogram(std::span<const double> x, double rate_hz);

// Sum of PSD * df over bins whose centre frequency lies in [low, high).
// Throws LengthError for windows shorter than one second.
BandPowers psd_band_powers(std::span<const double> x, double rate_hz);

struct Moments {
  double mean{0.0};
  double variance{0.0}; // population
  double skewness{0.0};
  double kurtosis{0.0}; // excess
};

// Population moments. Zero variance reports skewness = kurtosis = 0.
Moments stat_moments(std::span<const double> x);

struct Morphology {
  double curve_length{0.0};
  double peak_count{0.0};
  double nonlinear_energy{0.0}; // mean Teager energy over interior samples
};

Morphology morphological(std::span<const double> x);

// Energies of details 1..levels followed by the final approximation.
// Input is zero padded to a multiple of 2^levels (energy preserving).
std::vector<double> wavelet_energies(std::span<const double> x, std::size_t levels = 4);

// Yule-Walker AR(2) via Levinson-Durbin on the biased autocovariance;
// x[n] = a1 x[n-1] + a2 x[n-2] + e. Throws DegenerateInputError for a
// constant window and LengthError below 16 samples.
std::array<double, 2> ar_coefficients(std::span<const double> x);

// ApEn(m, r = r_factor * population std), self matches included.
double approximate_entropy(std::span<const double> x, std::size_t m = 2, double r_factor = 0.2);

struct HurstEstimate {
  double value{0.0};
  bool clamped{false};
};

// Rescaled-range estimate over chunk sizes {8, 16, 32, 64}, clamped to
// [0, 1.5]. Zero-variance chunks are skipped; DegenerateInputError when
// fewer than two chunk sizes remain.
HurstEstimate hurst_exponent(std::span<const double> x);

// Eye tracking -------------------------------------------------------------

struct GazeFeatures {
  double saccade_count{0.0};
  double mean_saccade_peak_velocity_dps{0.0};
  double fixation_count{0.0};
  double mean_fixation_duration_ms{0.0};
  double total_fixation_time_ms{0.0};
  double gaze_dispersion_deg{0.0};
};

// Saccades are maximal runs with velocity > threshold; fixations are maximal
// runs at or below it lasting at least min_fixation_ms. Undefined velocity
// breaks runs. Throws DegenerateInputError when no gaze sample is valid.
GazeFeatures gaze_features(const SampledSignal& gaze_window, std::span<const double> velocity_dps,
                           double saccade_threshold_dps = 25.0, double min_fixation_ms = 60.0);

struct BlinkFeatures {
  double blink_count{0.0};
  double mean_blink_duration_ms{0.0};
};

// Blinks are maximal missing runs lasting [min_ms, max_ms].
BlinkFeatures blink_features(std::span<const double> pupil, double rate_hz, double min_ms = 70.0,
                             double max_ms = 450.0);

// ECG ---------------------------------------------------------------------

struct RrSeries {
  std::vector<double> peak_times_s;
  std::vector<double> intervals_ms;
};

RrSeries rr_from_peaks(std::vector<double> peak_times_s);

struct RPeakOptions {
  double band_low_hz{5.0};
  double band_high_hz{15.0};
  double integration_ms{150.0};
  double refractory_ms{250.0};
  double search_ms{50.0};
  std::size_t threshold_history{8};
  double threshold_fraction{0.5};
};

// Pan-Tompkins style detector: 5-15 Hz bandpass, derivative, square,
// 150 ms moving integration, adaptive threshold at half the running mean of
// the last eight integrated peaks, 250 ms refractory period. Peak times are
// the maxima of the input within +-50 ms of each detection.
RrSeries detect_r_peaks(const SampledSignal& ecg, const RPeakOptions& options = {});

struct RrMetrics {
  double mean_rr_ms{0.0};
  double sdnn_ms{0.0}; // n - 1 denominator
  double cv{0.0};
};

// DegenerateInputError below two intervals.
RrMetrics rr_metrics(std::span<const double> intervals_ms);

struct EcgStats {
  double mean{0.0};
  double std{0.0}; // population
  double skewness{0.0};
  double kurtosis{0.0};
};

EcgStats ecg_stats(std::span<const double> x);

// Window extraction --------------------------------------------------------

struct FeatureConfig {
  double window_s{1.0};
  std::size_t wavelet_levels{4};
  std::size_t apen_m{2};
  double apen_r_factor{0.2};
  double saccade_threshold_dps{25.0};
  double min_fixation_ms{60.0};
  double blink_min_ms{70.0};
  double blink_max_ms{450.0};
  // Trailing RR context ending at the window end; 0 restricts RR metrics to
  // the window itself and reports them unnormalised.
  double ecg_context_s{8.0};
  RPeakOptions r_peaks{};
};

// Stable, ordered feature names for a modality.
std::vector<std::string> feature_names(Modality modality, const FeatureConfig& cfg,
                                       std::span<const std::string> eeg_channels = {});

// Streams of one session after the modality chains, plus whole-session
// derived traces that windows are cut from.
struct PreprocessedSession {
  std::string participant_id;
  Environment environment{Environment::baseline};
  SampledSignal eeg;
  SampledSignal ecg;
  RrSeries r_peaks;
  double session_mean_rr_ms{0.0};
  bool has_eye_tracking{false};
  SampledSignal gaze;
  std::vector<double> gaze_velocity_dps;
  SampledSignal pupil;
};

// Runs the chains needed for the requested modalities.
PreprocessedSession preprocess_session(const SessionBundle& bundle, const PreprocessConfig& pre,
                                       const FeatureConfig& feat, std::span<const Modality> modalities);

struct WindowFeatures {
  FeatureVector features;
  bool flagged{false};
  std::string reason;
};

// Feature vector of [t_start, t_start + window). A window whose features
// cannot be computed (degenerate input, non-finite value) is returned flagged.
WindowFeatures extract_window_features(const PreprocessedSession& session, Modality modality, double t_start_s,
                                       const FeatureConfig& cfg);

} // namespace errsense
