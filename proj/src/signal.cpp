#include "errsense/signal.hpp"

#include "errsense/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace errsense {

namespace {

// Guards floor() against t values that land a few ulps below a sample instant.
constexpr double kIndexSlack = 1e-9;

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const E (&values)[N], const char* what) {
  for (E v : values) {
    if (to_string(v) == s) {
      return v;
    }
  }
  throw FormatError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

} // namespace

std::string_view to_string(EventKind v) { return v == EventKind::error ? "error" : "non_error"; }

std::string_view to_string(Task v) {
  switch (v) {
  case Task::radio_comms: return "radio_comms";
  case Task::ground_threats: return "ground_threats";
  case Task::warnings_panel: return "warnings_panel";
  }
  return "?";
}

std::string_view to_string(Difficulty v) {
  switch (v) {
  case Difficulty::low: return "low";
  case Difficulty::medium: return "medium";
  case Difficulty::high: return "high";
  }
  return "?";
}

std::string_view to_string(Environment v) {
  switch (v) {
  case Environment::baseline: return "baseline";
  case Environment::straight_level: return "straight_level";
  case Environment::two_g: return "two_g";
  }
  return "?";
}

std::string_view to_string(Modality v) {
  switch (v) {
  case Modality::eeg: return "eeg";
  case Modality::et: return "et";
  case Modality::ecg: return "ecg";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view s) {
  static constexpr EventKind all[] = {EventKind::error, EventKind::non_error};
  return parse_enum(s, all, "event kind");
}

Task parse_task(std::string_view s) {
  static constexpr Task all[] = {Task::radio_comms, Task::ground_threats, Task::warnings_panel};
  return parse_enum(s, all, "task");
}

Difficulty parse_difficulty(std::string_view s) { return parse_enum(s, kDifficulties, "difficulty"); }

Environment parse_environment(std::string_view s) { return parse_enum(s, kEnvironments, "environment"); }

Modality parse_modality(std::string_view s) {
  static constexpr Modality all[] = {Modality::eeg, Modality::et, Modality::ecg};
  return parse_enum(s, all, "modality");
}

void SampledSignal::validate(bool allow_nan) const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw ValidationError("signal rate must be positive");
  }
  if (!std::isfinite(start_epoch_s)) {
    throw ValidationError("signal epoch must be finite");
  }
  if (channel_labels.size() != samples.size()) {
    throw ValidationError("channel label count does not match channel count");
  }
  const std::size_t n = n_samples();
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c].size() != n) {
      throw ValidationError("channel '" + channel_labels[c] + "' has a different sample count");
    }
    if (!allow_nan && std::any_of(samples[c].begin(), samples[c].end(),
                                  [](double x) { return std::isnan(x); })) {
      throw ValidationError("channel '" + channel_labels[c] + "' contains missing samples");
    }
  }
}

std::size_t EventLog::count(EventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const Event& e) { return e.kind == kind; }));
}

std::vector<double> EventLog::times(EventKind kind) const {
  std::vector<double> out;
  for (const Event& e : events) {
    if (e.kind == kind) {
      out.push_back(e.time_s);
    }
  }
  return out;
}

void EventLog::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!std::isfinite(events[i].time_s)) {
      throw ValidationError("event time must be finite");
    }
    if (i > 0 && events[i].time_s < events[i - 1].time_s) {
      throw ValidationError("events are not sorted by time");
    }
  }
}

double SessionBundle::span_start_s() const {
  double t = std::max(eeg.start_epoch_s, ecg.start_epoch_s);
  if (gaze) t = std::max(t, gaze->start_epoch_s);
  if (pupil) t = std::max(t, pupil->start_epoch_s);
  return t;
}

double SessionBundle::span_end_s() const {
  double t = std::min(eeg.end_epoch_s(), ecg.end_epoch_s());
  if (gaze) t = std::min(t, gaze->end_epoch_s());
  if (pupil) t = std::min(t, pupil->end_epoch_s());
  return t;
}

Difficulty SessionBundle::difficulty_at(double t_s) const {
  for (const Block& b : blocks) {
    if (t_s >= b.t_start_s && t_s < b.t_end_s) {
      return b.difficulty;
    }
  }
  const Event* best = nullptr;
  for (const Event& e : events.events) {
    if (!best || std::abs(e.time_s - t_s) < std::abs(best->time_s - t_s)) {
      best = &e;
    }
  }
  return best ? best->difficulty : Difficulty::low;
}

void SessionBundle::validate() const {
  eeg.validate();
  ecg.validate();
  if (gaze.has_value() != pupil.has_value()) {
    throw ValidationError("gaze and pupil streams must be present or absent together");
  }
  if (gaze) {
    gaze->validate();
    pupil->validate();
    if (gaze->n_channels() != 2) throw ValidationError("gaze stream must have 2 channels");
    if (pupil->n_channels() != 1) throw ValidationError("pupil stream must have 1 channel");
  }
  if (ecg.n_channels() != 1) {
    throw ValidationError("ECG stream must have 1 channel");
  }
  events.validate();
  const double t0 = span_start_s();
  const double t1 = span_end_s();
  for (const Event& e : events.events) {
    if (e.time_s < t0 || e.time_s >= t1) {
      throw ValidationError("event at " + std::to_string(e.time_s) + " s lies outside the recorded span");
    }
  }
  for (const Block& b : blocks) {
    if (!(b.t_end_s > b.t_start_s)) {
      throw ValidationError("block has non-positive duration");
    }
  }
}

std::size_t time_to_index(const SampledSignal& signal, double t_s) {
  const double offset = (t_s - signal.start_epoch_s) * signal.rate_hz;
  const double idx = std::floor(offset + kIndexSlack);
  if (!(idx >= 0.0) || idx >= static_cast<double>(signal.n_samples())) {
    throw RangeError("time " + std::to_string(t_s) + " s is outside the signal span");
  }
  return static_cast<std::size_t>(idx);
}

SampledSignal slice_window(const SampledSignal& signal, double t_start_s, double duration_s) {
  if (!(duration_s > 0.0)) {
    throw RangeError("window duration must be positive");
  }
  const std::size_t first = time_to_index(signal, t_start_s);
  const auto count = static_cast<std::size_t>(std::llround(duration_s * signal.rate_hz));
  if (first + count > signal.n_samples()) {
    throw RangeError("window [" + std::to_string(t_start_s) + ", " + std::to_string(t_start_s + duration_s) +
                     ") extends past the signal end");
  }
  SampledSignal out;
  out.channel_labels = signal.channel_labels;
  out.rate_hz = signal.rate_hz;
  out.start_epoch_s = signal.start_epoch_s + static_cast<double>(first) / signal.rate_hz;
  out.samples.reserve(signal.n_channels());
  for (const auto& ch : signal.samples) {
    out.samples.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(first),
                             ch.begin() + static_cast<std::ptrdiff_t>(first + count));
  }
  return out;
}

} // namespace errsense
