#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace errsense {

enum class EventKind { error, non_error };
enum class Task { radio_comms, ground_threats, warnings_panel };
enum class Difficulty { low, medium, high };
enum class Environment { baseline, straight_level, two_g };
enum class Modality { eeg, et, ecg };

std::string_view to_string(EventKind v);
std::string_view to_string(Task v);
std::string_view to_string(Difficulty v);
std::string_view to_string(Environment v);
std::string_view to_string(Modality v);

// Parsers throw FormatError on unknown names.
EventKind parse_event_kind(std::string_view s);
Task parse_task(std::string_view s);
Difficulty parse_difficulty(std::string_view s);
Environment parse_environment(std::string_view s);
Modality parse_modality(std::string_view s);

inline constexpr Environment kEnvironments[] = {Environment::baseline, Environment::straight_level,
                                                Environment::two_g};
inline constexpr Difficulty kDifficulties[] = {Difficulty::low, Difficulty::medium, Difficulty::high};

// Uniformly sampled multi-channel series on the shared session clock.
// samples[c][n] is sample n of channel c. Units depend on the stream:
// microvolts (EEG), millivolts (ECG), degrees (gaze), millimetres (pupil).
// Missing samples are NaN; only gaze and pupil streams may carry them.
struct SampledSignal {
  std::vector<std::string> channel_labels;
  double rate_hz{0.0};
  double start_epoch_s{0.0};
  std::vector<std::vector<double>> samples;

  std::size_t n_channels() const { return samples.size(); }
  std::size_t n_samples() const { return samples.empty() ? 0 : samples.front().size(); }
  double duration_s() const { return static_cast<double>(n_samples()) / rate_hz; }
  double end_epoch_s() const { return start_epoch_s + duration_s(); }
  std::span<const double> channel(std::size_t c) const { return samples.at(c); }

  // Throws ValidationError on a non-positive rate, ragged channels or a
  // label/channel count mismatch. allow_nan=false also rejects NaN samples.
  void validate(bool allow_nan = true) const;
};

struct Event {
  double time_s{0.0};
  EventKind kind{EventKind::non_error};
  Task task{Task::radio_comms};
  Difficulty difficulty{Difficulty::low};
  Environment environment{Environment::baseline};
  std::string participant_id;
};

struct EventLog {
  std::vector<Event> events;

  std::size_t count(EventKind kind) const;
  std::vector<double> times(EventKind kind) const;
  // Sorted ascending by time_s; throws ValidationError otherwise.
  void validate() const;
};

// A contiguous task block of constant difficulty.
struct Block {
  double t_start_s{0.0};
  double t_end_s{0.0};
  Difficulty difficulty{Difficulty::low};
};

struct SessionBundle {
  std::string participant_id;
  Environment environment{Environment::baseline};
  SampledSignal eeg;
  SampledSignal ecg;
  std::optional<SampledSignal> gaze;
  std::optional<SampledSignal> pupil;
  EventLog events;
  std::vector<Block> blocks;

  bool has_eye_tracking() const { return gaze.has_value() && pupil.has_value(); }
  // Interval covered by every recorded stream.
  double span_start_s() const;
  double span_end_s() const;
  // Difficulty of the block containing t; falls back to the nearest event
  // when the session carries no block table.
  Difficulty difficulty_at(double t_s) const;

  void validate() const;
};

// floor((t - start_epoch) * rate). Throws RangeError outside the signal span.
std::size_t time_to_index(const SampledSignal& signal, double t_s);

// Copy of [t_start, t_start + duration) holding round(duration * rate)
// samples. The returned epoch sits on the source sample grid. Windows are
// never zero padded: partial overlap throws RangeError.
SampledSignal slice_window(const SampledSignal& signal, double t_start_s, double duration_s);

} // namespace errsense
