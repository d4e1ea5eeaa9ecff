#pragma once

#include "errsense/features.hpp"
#include "errsense/preprocess.hpp"
#include "errsense/signal.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace errsense {

struct WindowSample {
  std::string participant_id;
  Environment environment{Environment::baseline};
  Difficulty difficulty{Difficulty::low};
  Modality modality{Modality::eeg};
  double t_start_s{0.0};
  EventKind label{EventKind::non_error};
  std::vector<double> features;
};

struct DatasetStats {
  std::size_t error_events{0};
  std::size_t error_out_of_span{0};  // window would leave the recording
  std::size_t error_flagged{0};      // dropped together with one non-error draw
  std::size_t non_error_redrawn{0};
  std::vector<std::string> skipped_sessions; // no data for the modality
};

struct Dataset {
  Modality modality{Modality::eeg};
  std::vector<std::string> feature_names;
  std::vector<WindowSample> samples;
  DatasetStats stats;

  std::size_t count(EventKind label) const;
  std::size_t size() const { return samples.size(); }
  std::vector<std::string> participants() const; // sorted, unique
  // Subset in the given index order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct DatasetConfig {
  double width_s{1.0};
  double guard_s{2.0};
  std::uint64_t seed{7};
};

// Starts of [t, t + width) windows, one per error event inside the span.
std::vector<double> make_error_windows(const SessionBundle& bundle, double width_s = 1.0,
                                       std::size_t* dropped = nullptr);

// min over the window span of |t - event|; zero when the event lies inside.
double window_event_distance(double t_start_s, double width_s, double event_s);

// Width-aligned starts (from the span start) whose windows lie strictly
// further than guard_s from every error event.
std::vector<double> nonerror_candidates(const SessionBundle& bundle, double width_s, double guard_s);

struct NonErrorDraw {
  std::vector<double> selected; // ascending
  std::vector<double> reserve;  // remaining candidates in redraw order
};

// Draws n candidates without replacement, with quotas per difficulty block
// proportional to block duration. Cells short of their quota pass the
// remainder to the others. CapacityError when the session cannot supply n.
NonErrorDraw draw_nonerror_windows(const SessionBundle& bundle, std::size_t n, double width_s, double guard_s,
                                   std::uint64_t seed);
std::vector<double> sample_nonerror_windows(const SessionBundle& bundle, std::size_t n, double width_s = 1.0,
                                            double guard_s = 2.0, std::uint64_t seed = 7);

// Accumulates sessions one at a time so only one preprocessed session is
// held in memory.
class DatasetBuilder {
public:
  DatasetBuilder(Modality modality, PreprocessConfig pre, FeatureConfig feat, DatasetConfig cfg);

  void add(const SessionBundle& bundle);
  const Dataset& dataset() const { return data_; }
  Dataset take() { return std::move(data_); }

private:
  Modality modality_;
  PreprocessConfig pre_;
  FeatureConfig feat_;
  DatasetConfig cfg_;
  Dataset data_;
};

Dataset build_dataset(std::span<const SessionBundle> bundles, Modality modality, const PreprocessConfig& pre,
                      const FeatureConfig& feat, const DatasetConfig& cfg);

// Throws InvariantError if class counts differ.
void check_balance(const Dataset& d);

// CSV: participant_id, environment, difficulty, t_start_s, label, features.
void write_dataset_csv(const Dataset& d, const std::filesystem::path& file);
Dataset read_dataset_csv(const std::filesystem::path& file, Modality modality);

} // namespace errsense
