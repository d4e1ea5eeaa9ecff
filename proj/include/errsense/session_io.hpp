#pragma once

#include "errsense/signal.hpp"

#include <json.hpp>

#include <filesystem>

namespace errsense {

// Session directory layout:
//   manifest.json  participant, environment, per-stream rate/channels/file, blocks
//   eeg.csv ecg.csv [gaze.csv pupil.csv] events.csv
// Signal CSVs carry a header row, a t_s column with 6 fractional digits and
// one column per channel; an empty field is a missing sample.

// Reads and validates a session. FormatError for a missing or malformed
// manifest/CSV; ValidationError when the file contents contradict the
// manifest (rate, channel count) or the bundle invariants.
SessionBundle load_session(const std::filesystem::path& dir);

// Writes the bundle; `provenance` is stored verbatim under the manifest's
// "provenance" key. Throws IoError when the directory cannot be written.
void save_session(const SessionBundle& bundle, const std::filesystem::path& dir,
                  const nlohmann::json& provenance = nlohmann::json::object());

// Lower-level pieces, exposed for tests and for the dataset writer.
void write_signal_csv(const SampledSignal& signal, const std::filesystem::path& file);
SampledSignal read_signal_csv(const std::filesystem::path& file, double rate_hz, double start_epoch_s);
void write_events_csv(const EventLog& log, const std::filesystem::path& file);
EventLog read_events_csv(const std::filesystem::path& file);

// Shortest general-format text with `digits` significant digits.
std::string format_number(double value, int digits = 10);

} // namespace errsense
