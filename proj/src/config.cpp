#include "errsense/config.hpp"

#include "errsense/error.hpp"
#include "errsense/rng.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace errsense {

using nlohmann::json;

namespace {

// Value encoding ------------------------------------------------------------

template <typename T>
json encode(const T& v) {
  return v;
}
json encode(Environment v) { return std::string(to_string(v)); }
json encode(Difficulty v) { return std::string(to_string(v)); }
json encode(Modality v) { return std::string(to_string(v)); }
json encode(Strategy v) { return std::string(to_string(v)); }
json encode(ClassifierKind v) { return std::string(to_string(v)); }
json encode(Activation v) { return v == Activation::relu ? "relu" : "tanh"; }
json encode(const std::filesystem::path& p) { return p.generic_string(); }
json encode(const std::array<double, 3>& g) {
  json j;
  for (Environment e : kEnvironments) j[std::string(to_string(e))] = g[static_cast<int>(e)];
  return j;
}
template <typename T>
json encode(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(encode(x));
  return a;
}

struct BadValue {
  std::string expected;
};

void decode(const json& j, double& v) {
  if (!j.is_number()) throw BadValue{"a number"};
  v = j.get<double>();
}
void decode(const json& j, std::size_t& v) {
  if (!j.is_number_unsigned()) throw BadValue{"a non-negative integer"};
  v = j.get<std::size_t>();
}
void decode(const json& j, bool& v) {
  if (!j.is_boolean()) throw BadValue{"true or false"};
  v = j.get<bool>();
}
void decode(const json& j, std::string& v) {
  if (!j.is_string()) throw BadValue{"a string"};
  v = j.get<std::string>();
}
void decode(const json& j, std::filesystem::path& v) {
  std::string s;
  decode(j, s);
  v = s;
}
template <typename E, typename Parse>
void decode_enum(const json& j, E& v, Parse parse) {
  std::string s;
  decode(j, s);
  try {
    v = parse(s);
  } catch (const FormatError&) {
    throw BadValue{"a known name, not '" + s + "'"};
  }
}
void decode(const json& j, Environment& v) { decode_enum(j, v, parse_environment); }
void decode(const json& j, Difficulty& v) { decode_enum(j, v, parse_difficulty); }
void decode(const json& j, Modality& v) { decode_enum(j, v, parse_modality); }
void decode(const json& j, Strategy& v) { decode_enum(j, v, parse_strategy); }
void decode(const json& j, ClassifierKind& v) { decode_enum(j, v, parse_classifier); }
void decode(const json& j, Activation& v) {
  decode_enum(j, v, [](std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw FormatError("activation");
  });
}
void decode(const json& j, std::array<double, 3>& g) {
  if (!j.is_object()) throw BadValue{"an object keyed by environment"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    Environment e;
    decode(json(it.key()), e);
    decode(it.value(), g[static_cast<int>(e)]);
  }
}
template <typename T>
void decode(const json& j, std::vector<T>& v) {
  if (!j.is_array()) throw BadValue{"an array"};
  v.clear();
  for (const auto& x : j) {
    T item{};
    decode(x, item);
    v.push_back(item);
  }
}

// Visitors --------------------------------------------------------------------

class Writer {
public:
  json root = json::object();

  template <typename F>
  void section(const char* name, F&& body) {
    json* parent = cur_;
    json& child = (*cur_)[name] = json::object();
    cur_ = &child;
    body();
    cur_ = parent;
  }
  template <typename T>
  void field(const char* key, T& v) {
    (*cur_)[key] = encode(v);
  }
  void field(const char* key, std::optional<std::uint64_t>& v) {
    if (v) (*cur_)[key] = *v;
  }

private:
  json* cur_ = &root;
};

class Reader {
public:
  explicit Reader(const json& root) {
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    stack_.push_back({&root, "", {}});
  }

  template <typename F>
  void section(const char* name, F&& body) {
    Frame& f = stack_.back();
    f.used.insert(name);
    auto it = f.node->find(name);
    if (it == f.node->end()) return;
    const std::string path = f.path + name;
    if (!it->is_object()) throw ConfigError(path + ": expected an object");
    stack_.push_back({&*it, path + ".", {}});
    body();
    finish();
  }
  template <typename T>
  void field(const char* key, T& v) {
    Frame& f = stack_.back();
    f.used.insert(key);
    auto it = f.node->find(key);
    if (it == f.node->end()) return;
    try {
      decode(*it, v);
    } catch (const BadValue& b) {
      throw ConfigError(f.path + key + ": expected " + b.expected);
    }
  }
  void field(const char* key, std::optional<std::uint64_t>& v) {
    std::size_t x = 0;
    Frame& f = stack_.back();
    if (f.node->contains(key)) {
      field(key, x);
      v = x;
    } else {
      f.used.insert(key);
    }
  }
  void finish() {
    Frame& f = stack_.back();
    for (auto it = f.node->begin(); it != f.node->end(); ++it) {
      if (!f.used.count(it.key())) throw ConfigError("unknown config key '" + f.path + it.key() + "'");
    }
    stack_.pop_back();
  }

private:
  struct Frame {
    const json* node;
    std::string path;
    std::set<std::string> used;
  };
  std::vector<Frame> stack_;
};

template <typename Io>
void visit(Io& io, RunConfig& c) {
  io.field("seed", c.seed);
  io.section("synth", [&] {
    SynthPlan& s = c.synth;
    io.field("participants", s.participants);
    io.field("environments", s.environments);
    io.field("difficulties", s.difficulties);
    io.field("eye_tracking_participants", s.eye_tracking_participants);
    io.field("motion_gain", s.motion_gain);
    io.field("shuffle_difficulty", s.shuffle_difficulty);
    io.field("errp_amplitude_spread", s.errp_amplitude_spread);
    SynthConfig& b = s.block;
    io.field("block_duration_s", b.block_duration_s);
    io.field("errp_amplitude_uv", b.errp_amplitude_uv);
    io.field("noise_sigma_uv", b.noise_sigma_uv);
    io.field("motion_artifact_uv", b.motion_artifact_uv);
    io.field("pupil_dilation_mm", b.pupil_dilation_mm);
    io.field("blink_rate_hz", b.blink_rate_hz);
    io.field("mean_rr_ms", b.mean_rr_ms);
    io.field("rr_jitter_ms", b.rr_jitter_ms);
    io.field("rr_error_shortening_ms", b.rr_error_shortening_ms);
    io.field("motion_rr_ms", b.motion_rr_ms);
    io.field("error_saccade_probability", b.error_saccade_probability);
  });
  io.section("preprocess", [&] {
    PreprocessConfig& p = c.preprocess;
    io.field("eeg_low_hz", p.eeg_low_hz);
    io.field("eeg_high_hz", p.eeg_high_hz);
    io.field("eeg_transition_low_hz", p.eeg_transition_low_hz);
    io.field("eeg_transition_high_hz", p.eeg_transition_high_hz);
    io.field("ecg_low_hz", p.ecg_low_hz);
    io.field("ecg_high_hz", p.ecg_high_hz);
    io.field("ecg_transition_low_hz", p.ecg_transition_low_hz);
    io.field("ecg_transition_high_hz", p.ecg_transition_high_hz);
    io.field("ecg_wavelet_levels", p.ecg_wavelet_levels);
    io.field("ivt_threshold_dps", p.ivt_threshold_dps);
    io.field("velocity_window_ms", p.velocity_window_ms);
    io.field("gaze_median_kernel", p.gaze_median_kernel);
    io.field("gaze_max_gap_ms", p.gaze_max_gap_ms);
    io.section("pupil", [&] {
      io.field("first_median", p.pupil.first_median);
      io.field("max_rate_mm_per_s", p.pupil.max_rate_mm_per_s);
      io.field("second_median", p.pupil.second_median);
      io.field("max_spline_gap_ms", p.pupil.max_spline_gap_ms);
    });
  });
  io.section("features", [&] {
    FeatureConfig& f = c.features;
    io.field("window_s", f.window_s);
    io.field("wavelet_levels", f.wavelet_levels);
    io.field("apen_m", f.apen_m);
    io.field("apen_r_factor", f.apen_r_factor);
    io.field("saccade_threshold_dps", f.saccade_threshold_dps);
    io.field("min_fixation_ms", f.min_fixation_ms);
    io.field("blink_min_ms", f.blink_min_ms);
    io.field("blink_max_ms", f.blink_max_ms);
    io.field("ecg_context_s", f.ecg_context_s);
    io.section("r_peaks", [&] {
      RPeakOptions& r = f.r_peaks;
      io.field("band_low_hz", r.band_low_hz);
      io.field("band_high_hz", r.band_high_hz);
      io.field("integration_ms", r.integration_ms);
      io.field("refractory_ms", r.refractory_ms);
      io.field("search_ms", r.search_ms);
      io.field("threshold_history", r.threshold_history);
      io.field("threshold_fraction", r.threshold_fraction);
    });
  });
  io.section("dataset", [&] {
    io.field("width_s", c.dataset.width_s);
    io.field("guard_s", c.dataset.guard_s);
  });
  io.section("learn", [&] {
    io.section("random_forest", [&] {
      io.field("n_trees", c.learn.forest.n_trees);
      io.field("max_depth", c.learn.forest.max_depth);
      io.field("min_leaf", c.learn.forest.min_leaf);
      io.field("features_per_split", c.learn.forest.features_per_split);
    });
    io.section("adaboost", [&] {
      io.field("n_rounds", c.learn.adaboost.n_rounds);
      io.field("stump_depth", c.learn.adaboost.stump_depth);
    });
    io.section("mlp", [&] {
      io.field("hidden", c.learn.mlp.hidden);
      io.field("activation", c.learn.mlp.activation);
      io.field("epochs", c.learn.mlp.epochs);
      io.field("batch", c.learn.mlp.batch);
      io.field("lr", c.learn.mlp.lr);
      io.field("l2", c.learn.mlp.l2);
    });
  });
  io.section("eval", [&] { io.field("k", c.eval.k); });
  io.section("pipeline", [&] {
    io.field("modalities", c.pipeline.modalities);
    io.field("strategies", c.pipeline.strategies);
    io.field("classifiers", c.pipeline.classifiers);
  });
  io.section("verify", [&] { io.field("tolerance_scale", c.verify.tolerance_scale); });
  io.section("paths", [&] {
    io.field("sessions", c.paths.sessions);
    io.field("out", c.paths.out);
  });
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.synth.participants >= 1, "synth.participants must be at least 1");
  need(!c.synth.environments.empty(), "synth.environments must not be empty");
  need(!c.synth.difficulties.empty(), "synth.difficulties must not be empty");
  need(c.synth.errp_amplitude_spread >= 0.0 && c.synth.errp_amplitude_spread < 1.0,
       "synth.errp_amplitude_spread must lie in [0, 1)");
  for (double g : c.synth.motion_gain) need(g >= 0.0, "synth.motion_gain values must be non-negative");
  try {
    c.synth.block.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
  need(c.dataset.width_s > 0.0 && c.dataset.guard_s >= 0.0, "dataset.width_s must be positive, guard_s >= 0");
  need(c.features.window_s == c.dataset.width_s, "features.window_s must equal dataset.width_s");
  need(c.eval.k >= 2, "eval.k must be at least 2");
  need(!c.pipeline.modalities.empty(), "pipeline.modalities must not be empty");
  need(!c.pipeline.strategies.empty(), "pipeline.strategies must not be empty");
  need(!c.pipeline.classifiers.empty(), "pipeline.classifiers must not be empty");
  need(c.verify.tolerance_scale >= 0.0, "verify.tolerance_scale must be non-negative");
  need(c.learn.forest.n_trees >= 1, "learn.random_forest.n_trees must be at least 1");
  need(c.learn.mlp.batch >= 1 && c.learn.mlp.lr > 0.0, "learn.mlp.batch and lr must be positive");
}

} // namespace

std::uint64_t RunConfig::master_seed() const {
  if (!seed) throw ConfigError("a master seed is required (config 'seed' or --seed)");
  return *seed;
}

std::uint64_t RunConfig::synth_seed() const { return derive_seed(master_seed(), "synth"); }

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.preprocess = preprocess;
  e.features = features;
  e.dataset = dataset;
  e.dataset.seed = derive_seed(master_seed(), "dataset");
  e.learn = learn;
  e.eval = eval;
  e.eval.seed = derive_seed(master_seed(), "eval");
  return e;
}

json RunConfig::to_json() const {
  Writer w;
  RunConfig copy = *this;
  visit(w, copy);
  return w.root;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Reader r(j);
  visit(r, c);
  r.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + file.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string artifact_version() { return ERRSENSE_VERSION; }

json provenance(const RunConfig& cfg) {
  return {{"artifact_version", artifact_version()}, {"config_hash", cfg.hash()}};
}

} // namespace errsense
