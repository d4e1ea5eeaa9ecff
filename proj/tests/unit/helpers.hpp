#pragma once

#include "errsense/rng.hpp"
#include "errsense/signal.hpp"
#include "errsense/synth.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline errsense::SampledSignal constant_signal(std::size_t channels, std::size_t n, double rate, double value = 0.0) {
  errsense::SampledSignal s;
  s.rate_hz = rate;
  for (std::size_t c = 0; c < channels; ++c) {
    s.channel_labels.push_back("c" + std::to_string(c));
    s.samples.emplace_back(n, value);
  }
  return s;
}

inline errsense::SampledSignal single(std::vector<double> x, double rate, std::string label = "x") {
  errsense::SampledSignal s;
  s.rate_hz = rate;
  s.channel_labels = {std::move(label)};
  s.samples = {std::move(x)};
  return s;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  errsense::Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

// A short, cheap session: one block of the given length per difficulty.
inline errsense::SessionBundle small_session(std::uint64_t seed, double block_s = 60.0, bool eye = true,
                                             errsense::Environment env = errsense::Environment::baseline,
                                             std::string pid = "P1") {
  std::vector<errsense::SynthConfig> blocks;
  for (auto d : errsense::kDifficulties) {
    errsense::SynthConfig c;
    c.participant_id = pid;
    c.environment = env;
    c.difficulty = d;
    c.block_duration_s = block_s;
    c.eye_tracking = eye;
    c.motion_artifact_gain = errsense::default_motion_gain(env);
    c.seed = errsense::derive_seed(seed, static_cast<std::uint64_t>(d));
    blocks.push_back(c);
  }
  return errsense::generate_session(blocks);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("errsense_test_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace testing
