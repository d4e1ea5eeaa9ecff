#pragma once

#include "errsense/signal.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace errsense {

// Parameters of one task block. A session is a sequence of blocks sharing
// participant and environment.
struct SynthConfig {
  std::string participant_id{"P1"};
  Environment environment{Environment::baseline};
  Difficulty difficulty{Difficulty::low};
  double block_duration_s{180.0};

  double errp_amplitude_uv{40.0};   // Pe peak; Ne peak is -ne_ratio times this
  double noise_sigma_uv{10.0};      // pink background, per channel
  double motion_artifact_gain{0.0}; // multiplies motion_artifact_uv
  double motion_artifact_uv{2.0};   // 0.5-4 Hz artefact at unit gain
  double pupil_dilation_mm{0.15};
  double blink_rate_hz{0.25};
  double mean_rr_ms{800.0};
  double rr_jitter_ms{25.0};
  double rr_error_shortening_ms{4.0};
  double motion_rr_ms{30.0};             // slow RR modulation at unit gain
  double error_saccade_probability{0.4}; // post-error extra saccade
  bool eye_tracking{true};
  std::uint64_t seed{1};

  // Throws ValidationError for non-finite or out-of-range fields.
  void validate() const;
};

// Motion gains by environment: baseline 0, straight-and-level 1, 2G 2.
double default_motion_gain(Environment env);

// Expected error count per 180 s block.
double expected_error_count(Environment env, Difficulty difficulty);

struct ErrpTemplate {
  double ne_latency_s{0.08};
  double ne_width_s{0.04}; // full width at half maximum
  double ne_amplitude{-5.0};
  double pe_latency_s{0.30};
  double pe_width_s{0.10};
  double pe_amplitude{7.0};
  std::vector<double> channel_weights;

  void validate(std::size_t n_channels) const;
};

// The 24-electrode montage used for synthetic EEG, and ErrP gains that peak
// at fronto-central sites.
std::span<const std::string> eeg_montage();
std::vector<double> errp_channel_weights();
ErrpTemplate default_errp_template(double pe_amplitude_uv, double ne_ratio = 0.7);

// Error events follow a Poisson process scaled from the profile table;
// non-error task events arrive at three times the error rate plus one per
// ten seconds. Times are rounded to the microsecond.
EventLog generate_events(const SynthConfig& cfg, double block_start_s = 0.0);

struct EmbedResult {
  SampledSignal signal;
  std::size_t skipped{0}; // error events too close to the signal end
};

// Adds a negative Gaussian at t + ne_latency and a positive one at
// t + pe_latency for every error event, scaled per channel. Additive in the
// template amplitudes and in the event set.
EmbedResult embed_errp(const SampledSignal& eeg, const EventLog& events, const ErrpTemplate& tmpl);

// Sum-of-Gaussians PQRST train in millivolts with R peaks at beat_times_s.
std::vector<double> synth_ecg_from_beats(std::span<const double> beat_times_s, double rate_hz, std::size_t n_samples,
                                         double start_epoch_s = 0.0);

// Concatenates the blocks in list order into one session. Throws
// ValidationError when configs disagree on participant, environment or
// eye-tracking availability.
SessionBundle generate_session(std::span<const SynthConfig> blocks);

inline constexpr double kEegRateHz = 256.0;
inline constexpr double kEcgRateHz = 130.0;
inline constexpr double kGazeRateHz = 100.0;

} // namespace errsense
