#include "errsense/dataset.hpp"

#include "errsense/error.hpp"
#include "errsense/rng.hpp"
#include "errsense/session_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace errsense {

namespace {

std::string session_key(const SessionBundle& b) {
  return b.participant_id + "/" + std::string(to_string(b.environment));
}

struct Cell {
  double t_start;
  double t_end;
  Difficulty difficulty;
  std::vector<double> candidates;
  std::size_t quota{0};
};

std::vector<Cell> make_cells(const SessionBundle& bundle, std::span<const double> candidates) {
  std::vector<Cell> cells;
  if (bundle.blocks.empty()) {
    cells.push_back({bundle.span_start_s(), bundle.span_end_s(), bundle.difficulty_at(bundle.span_start_s()), {}});
  } else {
    for (const Block& b : bundle.blocks) cells.push_back({b.t_start_s, b.t_end_s, b.difficulty, {}});
  }
  for (double t : candidates) {
    for (Cell& c : cells) {
      if (t >= c.t_start && t < c.t_end) {
        c.candidates.push_back(t);
        break;
      }
    }
  }
  return cells;
}

// Largest-remainder apportionment by duration, then spill-over from cells
// that cannot meet their share to the cells with the most spare candidates.
void assign_quotas(std::vector<Cell>& cells, std::size_t n, const std::string& session) {
  double total = 0.0;
  for (const Cell& c : cells) total += c.t_end - c.t_start;
  std::size_t given = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double share = static_cast<double>(n) * (cells[i].t_end - cells[i].t_start) / total;
    cells[i].quota = static_cast<std::size_t>(std::floor(share));
    given += cells[i].quota;
    remainders.emplace_back(share - std::floor(share), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < n; ++k, ++given) ++cells[remainders[k % remainders.size()].second].quota;

  std::size_t available = 0;
  for (const Cell& c : cells) available += c.candidates.size();
  if (available < n) {
    std::string msg = "not enough non-error candidates in " + session + ": need " + std::to_string(n) + ", have " +
                      std::to_string(available) + ";";
    for (const Cell& c : cells) {
      if (c.candidates.size() < c.quota) {
        msg += " cell " + std::string(to_string(c.difficulty)) + " has " + std::to_string(c.candidates.size()) +
               " for a quota of " + std::to_string(c.quota) + ";";
      }
    }
    throw CapacityError(msg);
  }
  std::size_t excess = 0;
  for (Cell& c : cells) {
    if (c.quota > c.candidates.size()) {
      excess += c.quota - c.candidates.size();
      c.quota = c.candidates.size();
    }
  }
  while (excess > 0) {
    std::size_t best = cells.size();
    std::size_t best_spare = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::size_t spare = cells[i].candidates.size() - cells[i].quota;
      if (spare > best_spare) {
        best = i;
        best_spare = spare;
      }
    }
    ++cells[best].quota;
    --excess;
  }
}

void sort_session_samples(std::vector<WindowSample>& v, std::size_t from) {
  std::stable_sort(v.begin() + static_cast<std::ptrdiff_t>(from), v.end(),
                   [](const WindowSample& a, const WindowSample& b) {
                     if (a.t_start_s != b.t_start_s) return a.t_start_s < b.t_start_s;
                     return a.label < b.label;
                   });
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("dataset CSV line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

} // namespace

std::size_t Dataset::count(EventKind label) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [&](const WindowSample& s) { return s.label == label; }));
}

std::vector<std::string> Dataset::participants() const {
  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.participant_id);
  return {ids.begin(), ids.end()};
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset d;
  d.modality = modality;
  d.feature_names = feature_names;
  d.samples.reserve(indices.size());
  for (std::size_t i : indices) d.samples.push_back(samples.at(i));
  return d;
}

std::vector<double> make_error_windows(const SessionBundle& bundle, double width_s, std::size_t* dropped) {
  if (!(width_s > 0.0)) throw ParameterError("window width must be positive");
  const double lo = bundle.span_start_s();
  const double hi = bundle.span_end_s();
  std::vector<double> starts;
  std::size_t n_dropped = 0;
  for (const Event& e : bundle.events.events) {
    if (e.kind != EventKind::error) continue;
    if (e.time_s >= lo && e.time_s + width_s <= hi + 1e-9) {
      starts.push_back(e.time_s);
    } else {
      ++n_dropped;
    }
  }
  if (dropped) *dropped = n_dropped;
  return starts;
}

double window_event_distance(double t_start_s, double width_s, double event_s) {
  if (event_s < t_start_s) return t_start_s - event_s;
  if (event_s > t_start_s + width_s) return event_s - t_start_s - width_s;
  return 0.0;
}

std::vector<double> nonerror_candidates(const SessionBundle& bundle, double width_s, double guard_s) {
  if (!(width_s > 0.0)) throw ParameterError("window width must be positive");
  if (!(guard_s >= 0.0)) throw ParameterError("guard distance must be non-negative");
  const double lo = bundle.span_start_s();
  const double hi = bundle.span_end_s();
  const std::vector<double> errors = bundle.events.times(EventKind::error);
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = lo + static_cast<double>(k) * width_s;
    if (t + width_s > hi + 1e-9) break;
    // Only the nearest errors on either side can violate the guard.
    auto it = std::lower_bound(errors.begin(), errors.end(), t);
    bool ok = true;
    if (it != errors.end() && window_event_distance(t, width_s, *it) <= guard_s) ok = false;
    if (it != errors.begin() && window_event_distance(t, width_s, *std::prev(it)) <= guard_s) ok = false;
    if (ok) out.push_back(t);
  }
  return out;
}

NonErrorDraw draw_nonerror_windows(const SessionBundle& bundle, std::size_t n, double width_s, double guard_s,
                                   std::uint64_t seed) {
  const auto candidates = nonerror_candidates(bundle, width_s, guard_s);
  auto cells = make_cells(bundle, candidates);
  assign_quotas(cells, n, session_key(bundle));

  NonErrorDraw draw;
  std::vector<std::vector<double>> rest(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    auto pool = cells[i].candidates;
    rng.shuffle(pool);
    draw.selected.insert(draw.selected.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cells[i].quota));
    rest[i].assign(pool.begin() + static_cast<std::ptrdiff_t>(cells[i].quota), pool.end());
  }
  for (std::size_t k = 0;; ++k) {
    bool any = false;
    for (const auto& r : rest) {
      if (k < r.size()) {
        draw.reserve.push_back(r[k]);
        any = true;
      }
    }
    if (!any) break;
  }
  std::sort(draw.selected.begin(), draw.selected.end());
  return draw;
}

std::vector<double> sample_nonerror_windows(const SessionBundle& bundle, std::size_t n, double width_s,
                                            double guard_s, std::uint64_t seed) {
  return draw_nonerror_windows(bundle, n, width_s, guard_s, seed).selected;
}

DatasetBuilder::DatasetBuilder(Modality modality, PreprocessConfig pre, FeatureConfig feat, DatasetConfig cfg)
    : modality_(modality), pre_(std::move(pre)), feat_(std::move(feat)), cfg_(cfg) {
  data_.modality = modality;
  if (std::abs(cfg_.width_s - feat_.window_s) > 1e-12) {
    throw ParameterError("dataset window width must equal the feature window");
  }
}

void DatasetBuilder::add(const SessionBundle& bundle) {
  const std::string key = session_key(bundle);
  if (modality_ == Modality::et && !bundle.has_eye_tracking()) {
    data_.stats.skipped_sessions.push_back(key);
    return;
  }
  const Modality wanted[] = {modality_};
  const PreprocessedSession ps = preprocess_session(bundle, pre_, feat_, wanted);
  const auto names = feature_names(modality_, feat_, ps.eeg.channel_labels);
  if (data_.feature_names.empty()) {
    data_.feature_names = names;
  } else if (names != data_.feature_names) {
    throw SchemaError("session " + key + " yields a different feature layout");
  }

  const std::size_t first = data_.samples.size();
  auto push = [&](double t, EventKind label, std::vector<double> values) {
    data_.samples.push_back(
        {bundle.participant_id, bundle.environment, bundle.difficulty_at(t), modality_, t, label, std::move(values)});
  };

  std::size_t out_of_span = 0;
  const auto error_starts = make_error_windows(bundle, cfg_.width_s, &out_of_span);
  data_.stats.error_events += error_starts.size() + out_of_span;
  data_.stats.error_out_of_span += out_of_span;
  std::size_t n_error = 0;
  for (double t : error_starts) {
    auto wf = extract_window_features(ps, modality_, t, feat_);
    if (wf.flagged) {
      ++data_.stats.error_flagged;
      continue;
    }
    push(t, EventKind::error, std::move(wf.features.values));
    ++n_error;
  }

  const auto seed = derive_seed(cfg_.seed, key);
  const NonErrorDraw draw = draw_nonerror_windows(bundle, n_error, cfg_.width_s, cfg_.guard_s, seed);
  std::size_t next_reserve = 0;
  for (double t : draw.selected) {
    while (true) {
      auto wf = extract_window_features(ps, modality_, t, feat_);
      if (!wf.flagged) {
        push(t, EventKind::non_error, std::move(wf.features.values));
        break;
      }
      ++data_.stats.non_error_redrawn;
      if (next_reserve >= draw.reserve.size()) {
        throw CapacityError("session " + key + " ran out of usable non-error windows");
      }
      t = draw.reserve[next_reserve++];
    }
  }
  sort_session_samples(data_.samples, first);
}

Dataset build_dataset(std::span<const SessionBundle> bundles, Modality modality, const PreprocessConfig& pre,
                      const FeatureConfig& feat, const DatasetConfig& cfg) {
  DatasetBuilder builder(modality, pre, feat, cfg);
  for (const auto& b : bundles) builder.add(b);
  return builder.take();
}

void check_balance(const Dataset& d) {
  const auto e = d.count(EventKind::error);
  const auto ne = d.count(EventKind::non_error);
  if (e != ne) {
    throw InvariantError("unbalanced dataset: " + std::to_string(e) + " error vs " + std::to_string(ne) +
                         " non-error windows");
  }
}

void write_dataset_csv(const Dataset& d, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << "participant_id,environment,difficulty,t_start_s,label";
  for (const auto& n : d.feature_names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (const auto& s : d.samples) {
    std::snprintf(buf, sizeof buf, "%.6f", s.t_start_s);
    out << s.participant_id << ',' << to_string(s.environment) << ',' << to_string(s.difficulty) << ',' << buf
        << ',' << to_string(s.label);
    for (double v : s.features) out << ',' << format_number(v, 12);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + file.string());
}

Dataset read_dataset_csv(const std::filesystem::path& file, Modality modality) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(file.string() + " is empty");
  const auto header = split_csv(line);
  static constexpr std::string_view fixed[] = {"participant_id", "environment", "difficulty", "t_start_s", "label"};
  if (header.size() < 5 || !std::equal(std::begin(fixed), std::end(fixed), header.begin())) {
    throw FormatError(file.string() + " does not carry the dataset header");
  }
  Dataset d;
  d.modality = modality;
  for (std::size_t i = 5; i < header.size(); ++i) d.feature_names.emplace_back(header[i]);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw FormatError("dataset CSV line " + std::to_string(line_no) + " has the wrong field count");
    }
    WindowSample s;
    s.participant_id = std::string(f[0]);
    s.environment = parse_environment(f[1]);
    s.difficulty = parse_difficulty(f[2]);
    s.modality = modality;
    s.t_start_s = parse_double(f[3], line_no);
    s.label = parse_event_kind(f[4]);
    for (std::size_t i = 5; i < f.size(); ++i) s.features.push_back(parse_double(f[i], line_no));
    d.samples.push_back(std::move(s));
  }
  return d;
}

} // namespace errsense
