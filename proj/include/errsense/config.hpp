#pragma once

#include "errsense/eval.hpp"
#include "errsense/synth.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace errsense {

// How the synthetic cohort is laid out. `block` supplies the generator
// parameters; participant, environment, difficulty, motion gain and seed are
// filled in per block.
struct SynthPlan {
  std::size_t participants{9};
  std::vector<Environment> environments{Environment::baseline, Environment::straight_level, Environment::two_g};
  std::vector<Difficulty> difficulties{Difficulty::low, Difficulty::medium, Difficulty::high};
  std::vector<std::string> eye_tracking_participants{"P3", "P4", "P5", "P6"};
  std::array<double, 3> motion_gain{0.0, 1.0, 2.0}; // by environment
  bool shuffle_difficulty{true};
  double errp_amplitude_spread{0.15}; // per-participant relative ErrP variation
  SynthConfig block{};
};

struct PipelineConfig {
  std::vector<Modality> modalities{Modality::eeg, Modality::et, Modality::ecg};
  std::vector<Strategy> strategies{Strategy::grouped_cv, Strategy::lopo};
  std::vector<ClassifierKind> classifiers{ClassifierKind::random_forest};
};

struct VerifyConfig {
  double tolerance_scale{1.0};
};

struct PathsConfig {
  std::filesystem::path sessions{"sessions"};
  std::filesystem::path out{"out"};
};

struct RunConfig {
  std::optional<std::uint64_t> seed; // master seed
  SynthPlan synth{};
  PreprocessConfig preprocess{};
  FeatureConfig features{};
  DatasetConfig dataset{};
  LearnConfig learn{};
  EvalConfig eval{};
  PipelineConfig pipeline{};
  VerifyConfig verify{};
  PathsConfig paths{};

  // Master seed; ConfigError when none was given.
  std::uint64_t master_seed() const;
  // Stage configs with seeds derived from the master seed.
  ExperimentConfig experiment() const;
  std::uint64_t synth_seed() const;

  nlohmann::json to_json() const;
  // Hex FNV-1a of the canonical JSON dump.
  std::string hash() const;
};

// Unknown keys and ill-typed values raise ConfigError naming the key path.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& file);

// Provenance block embedded in every output.
nlohmann::json provenance(const RunConfig& cfg);
std::string artifact_version();

} // namespace errsense
