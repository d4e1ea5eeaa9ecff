#include "errsense/session_io.hpp"

#include "errsense/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace errsense {

namespace {

constexpr int kManifestVersion = 1;
constexpr double kRateTolerance = 1e-3;

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_for_write(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + file.string());
  }
  return out;
}

// Splits text into lines without copying; tolerates a trailing newline and CRLF.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find(',', pos);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return fields;
}

double parse_number(std::string_view field, const fs::path& file, std::size_t row) {
  if (field.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError(file.string() + ": bad number '" + std::string(field) + "' on row " + std::to_string(row));
  }
  return value;
}

json stream_entry(const SampledSignal& s, const std::string& file) {
  return json{{"file", file}, {"rate_hz", s.rate_hz}, {"start_epoch_s", s.start_epoch_s},
              {"channels", s.channel_labels}, {"n_samples", s.n_samples()}};
}

SampledSignal load_stream(const fs::path& dir, const json& entry, const char* name) {
  try {
    const auto file = entry.at("file").get<std::string>();
    const double rate = entry.at("rate_hz").get<double>();
    const double epoch = entry.at("start_epoch_s").get<double>();
    const auto channels = entry.at("channels").get<std::vector<std::string>>();
    SampledSignal s = read_signal_csv(dir / file, rate, epoch);
    if (s.channel_labels != channels) {
      throw ValidationError(std::string(name) + ": CSV channels do not match the manifest");
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest stream '") + name + "': " + e.what());
  }
}

} // namespace

std::string format_number(double value, int digits) {
  if (std::isnan(value)) {
    return {};
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, digits);
  (void)ec;
  return std::string(buf, ptr);
}

void write_signal_csv(const SampledSignal& signal, const fs::path& file) {
  auto out = open_for_write(file);
  std::string text = "t_s";
  for (const auto& label : signal.channel_labels) {
    text += ',';
    text += label;
  }
  text += '\n';
  const std::size_t n = signal.n_samples();
  char tbuf[64];
  for (std::size_t i = 0; i < n; ++i) {
    const double t = signal.start_epoch_s + static_cast<double>(i) / signal.rate_hz;
    auto [ptr, ec] = std::to_chars(tbuf, tbuf + sizeof(tbuf), t, std::chars_format::fixed, 6);
    (void)ec;
    text.append(tbuf, ptr);
    for (const auto& ch : signal.samples) {
      text += ',';
      text += format_number(ch[i]);
    }
    text += '\n';
    if (text.size() > (1u << 20)) {
      out << text;
      text.clear();
    }
  }
  out << text;
  if (!out) {
    throw IoError("failed writing " + file.string());
  }
}

SampledSignal read_signal_csv(const fs::path& file, double rate_hz, double start_epoch_s) {
  const std::string text = read_file(file);
  const auto lines = split_lines(text);
  if (lines.empty()) {
    throw FormatError(file.string() + ": missing header row");
  }
  const auto header = split_fields(lines[0]);
  if (header.empty() || header[0] != "t_s") {
    throw FormatError(file.string() + ": first column must be t_s");
  }
  SampledSignal s;
  s.rate_hz = rate_hz;
  s.start_epoch_s = start_epoch_s;
  for (std::size_t c = 1; c < header.size(); ++c) {
    s.channel_labels.emplace_back(header[c]);
  }
  const std::size_t n_rows = lines.size() - 1;
  s.samples.assign(s.channel_labels.size(), std::vector<double>(n_rows));
  double t_first = 0.0;
  double t_last = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != header.size()) {
      throw FormatError(file.string() + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " + std::to_string(header.size()));
    }
    const double t = parse_number(fields[0], file, r + 1);
    if (std::isnan(t)) {
      throw FormatError(file.string() + ": missing timestamp on row " + std::to_string(r + 1));
    }
    if (r == 0) t_first = t;
    t_last = t;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      s.samples[c - 1][r] = parse_number(fields[c], file, r + 1);
    }
  }
  if (!(rate_hz > 0.0)) {
    throw ValidationError(file.string() + ": manifest rate must be positive");
  }
  if (n_rows > 0 && std::abs(t_first - start_epoch_s) > 1e-6 + 0.5 / rate_hz) {
    throw ValidationError(file.string() + ": first timestamp does not match the manifest epoch");
  }
  if (n_rows >= 2) {
    const double implied = static_cast<double>(n_rows - 1) / (t_last - t_first);
    if (!(std::abs(implied - rate_hz) <= kRateTolerance * rate_hz)) {
      throw ValidationError(file.string() + ": rows imply " + std::to_string(implied) + " Hz but manifest says " +
                            std::to_string(rate_hz) + " Hz");
    }
  }
  return s;
}

void write_events_csv(const EventLog& log, const fs::path& file) {
  auto out = open_for_write(file);
  out << "t_s,kind,task,difficulty,environment,participant_id\n";
  char tbuf[64];
  for (const Event& e : log.events) {
    auto [ptr, ec] = std::to_chars(tbuf, tbuf + sizeof(tbuf), e.time_s, std::chars_format::fixed, 6);
    (void)ec;
    out << std::string_view(tbuf, static_cast<std::size_t>(ptr - tbuf)) << ',' << to_string(e.kind) << ','
        << to_string(e.task) << ',' << to_string(e.difficulty) << ',' << to_string(e.environment) << ','
        << e.participant_id << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + file.string());
  }
}

EventLog read_events_csv(const fs::path& file) {
  const std::string text = read_file(file);
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "t_s,kind,task,difficulty,environment,participant_id") {
    throw FormatError(file.string() + ": unexpected events header");
  }
  EventLog log;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split_fields(lines[r]);
    if (f.size() != 6) {
      throw FormatError(file.string() + ": row " + std::to_string(r) + " must have 6 fields");
    }
    Event e;
    e.time_s = parse_number(f[0], file, r);
    if (std::isnan(e.time_s)) {
      throw FormatError(file.string() + ": missing event time on row " + std::to_string(r));
    }
    e.kind = parse_event_kind(f[1]);
    e.task = parse_task(f[2]);
    e.difficulty = parse_difficulty(f[3]);
    e.environment = parse_environment(f[4]);
    e.participant_id = std::string(f[5]);
    log.events.push_back(std::move(e));
  }
  return log;
}

void save_session(const SessionBundle& bundle, const fs::path& dir, const json& provenance) {
  bundle.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create session directory " + dir.string());
  }
  json streams = {{"eeg", stream_entry(bundle.eeg, "eeg.csv")}, {"ecg", stream_entry(bundle.ecg, "ecg.csv")}};
  write_signal_csv(bundle.eeg, dir / "eeg.csv");
  write_signal_csv(bundle.ecg, dir / "ecg.csv");
  if (bundle.has_eye_tracking()) {
    streams["gaze"] = stream_entry(*bundle.gaze, "gaze.csv");
    streams["pupil"] = stream_entry(*bundle.pupil, "pupil.csv");
    write_signal_csv(*bundle.gaze, dir / "gaze.csv");
    write_signal_csv(*bundle.pupil, dir / "pupil.csv");
  }
  write_events_csv(bundle.events, dir / "events.csv");
  json blocks = json::array();
  for (const Block& b : bundle.blocks) {
    blocks.push_back({{"t_start_s", b.t_start_s}, {"t_end_s", b.t_end_s}, {"difficulty", to_string(b.difficulty)}});
  }
  json manifest = {{"format", "errsense-session"},
                   {"format_version", kManifestVersion},
                   {"participant_id", bundle.participant_id},
                   {"environment", to_string(bundle.environment)},
                   {"streams", streams},
                   {"events_file", "events.csv"},
                   {"blocks", blocks},
                   {"provenance", provenance}};
  auto out = open_for_write(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) {
    throw IoError("failed writing manifest in " + dir.string());
  }
}

SessionBundle load_session(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw FormatError("missing manifest.json in " + dir.string());
  }
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError("malformed manifest.json: " + std::string(e.what()));
  }
  SessionBundle b;
  try {
    b.participant_id = manifest.at("participant_id").get<std::string>();
    b.environment = parse_environment(manifest.at("environment").get<std::string>());
    const json& streams = manifest.at("streams");
    b.eeg = load_stream(dir, streams.at("eeg"), "eeg");
    b.ecg = load_stream(dir, streams.at("ecg"), "ecg");
    if (streams.contains("gaze")) b.gaze = load_stream(dir, streams.at("gaze"), "gaze");
    if (streams.contains("pupil")) b.pupil = load_stream(dir, streams.at("pupil"), "pupil");
    b.events = read_events_csv(dir / manifest.value("events_file", std::string("events.csv")));
    for (const json& blk : manifest.value("blocks", json::array())) {
      b.blocks.push_back({blk.at("t_start_s").get<double>(), blk.at("t_end_s").get<double>(),
                          parse_difficulty(blk.at("difficulty").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }
  b.validate();
  return b;
}

} // namespace errsense
