#include "errsense/synth.hpp"

#include "errsense/error.hpp"
#include "errsense/fft.hpp"
#include "errsense/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace errsense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// FWHM -> standard deviation.
const double kFwhmToSigma = 1.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
// Gaussian bumps are evaluated within this many sigmas of their centre.
constexpr double kBumpSupport = 8.0;

const std::vector<std::string> kMontage = {"Fp1", "Fp2", "F7",  "F3",  "Fz", "F4", "F8", "FC1",
                                           "FC2", "T7",  "C3",  "Cz",  "C4", "T8", "CP1", "CP2",
                                           "P7",  "P3",  "Pz",  "P4",  "P8", "O1", "Oz",  "O2"};
const std::vector<double> kErrpWeights = {0.15, 0.15, 0.20, 0.55, 0.85, 0.55, 0.20, 0.95, 0.95, 0.10, 0.60, 1.00,
                                          0.60, 0.10, 0.70, 0.70, 0.10, 0.35, 0.50, 0.35, 0.10, 0.05, 0.05, 0.05};

double round_us(double t) { return std::round(t * 1e6) / 1e6; }

// White noise shaped in the frequency domain and scaled to unit variance.
template <typename Gain>
std::vector<double> shaped_noise(Rng& rng, std::size_t n, double rate_hz, Gain gain) {
  std::vector<double> white(n);
  for (double& v : white) v = rng.normal();
  auto spec = fft::real_forward(white);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    spec[k] *= gain(static_cast<double>(k) * rate_hz / static_cast<double>(n));
  }
  auto out = fft::real_inverse(spec, n);
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double& v : out) {
    v -= mean;
    ss += v * v;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (sd > 0.0) {
    for (double& v : out) v /= sd;
  }
  return out;
}

std::vector<double> pink_noise(Rng& rng, std::size_t n, double rate_hz) {
  return shaped_noise(rng, n, rate_hz, [](double f) { return f < 0.1 ? 0.0 : 1.0 / std::sqrt(f); });
}

std::vector<double> motion_noise(Rng& rng, std::size_t n, double rate_hz) {
  return shaped_noise(rng, n, rate_hz, [](double f) { return (f >= 0.5 && f <= 4.0) ? 1.0 : 0.0; });
}

void add_bump(std::vector<double>& x, double rate_hz, double start_epoch_s, double centre_s, double sigma_s,
              double amplitude) {
  if (amplitude == 0.0) return;
  const double lo_t = centre_s - kBumpSupport * sigma_s;
  const double hi_t = centre_s + kBumpSupport * sigma_s;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil((lo_t - start_epoch_s) * rate_hz)));
  const auto hi = std::min<std::ptrdiff_t>(n - 1, static_cast<std::ptrdiff_t>(std::floor((hi_t - start_epoch_s) * rate_hz)));
  for (std::ptrdiff_t i = lo; i <= hi; ++i) {
    const double u = (start_epoch_s + static_cast<double>(i) / rate_hz - centre_s) / sigma_s;
    x[static_cast<std::size_t>(i)] += amplitude * std::exp(-0.5 * u * u);
  }
}

// Piecewise-constant per-block value at sample time t.
struct BlockTable {
  std::vector<double> starts;
  std::vector<const SynthConfig*> cfgs;

  const SynthConfig& at(double t) const {
    auto it = std::upper_bound(starts.begin(), starts.end(), t);
    const std::size_t i = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
    return *cfgs[i];
  }
};

struct Saccade {
  double onset;
  double duration;
  double x0, y0, x1, y1;
};

std::vector<Saccade> plan_saccades(Rng& rng, double total_s, std::vector<double> forced) {
  constexpr double kRegion = 12.0;
  std::sort(forced.begin(), forced.end());
  std::vector<Saccade> out;
  double x = rng.uniform(-5.0, 5.0);
  double y = rng.uniform(-5.0, 5.0);
  double free_from = 0.0;
  double next_natural = rng.uniform(0.1, 0.5);
  std::size_t fi = 0;
  while (true) {
    while (fi < forced.size() && forced[fi] < free_from) ++fi;
    double onset = next_natural;
    if (fi < forced.size() && forced[fi] < onset) {
      onset = forced[fi++];
    }
    if (onset >= total_s) break;
    const double amp = rng.uniform(2.0, 12.0);
    const double dir = rng.uniform(0.0, 2.0 * kPi);
    double dx = amp * std::cos(dir);
    double dy = amp * std::sin(dir);
    if (std::abs(x + dx) > kRegion) dx = -dx;
    if (std::abs(y + dy) > kRegion) dy = -dy;
    const double duration = 0.021 + 0.0022 * amp;
    out.push_back({onset, duration, x, y, x + dx, y + dy});
    x += dx;
    y += dy;
    free_from = onset + duration + 0.05;
    next_natural = onset + duration + rng.uniform(0.15, 0.55);
  }
  return out;
}

} // namespace

void SynthConfig::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(block_duration_s > 0.0) || !std::isfinite(block_duration_s)) {
    throw ValidationError("block_duration_s must be positive");
  }
  if (!(noise_sigma_uv > 0.0) || !std::isfinite(noise_sigma_uv)) {
    throw ValidationError("noise_sigma_uv must be positive");
  }
  if (!(mean_rr_ms > 0.0) || !std::isfinite(mean_rr_ms)) {
    throw ValidationError("mean_rr_ms must be positive");
  }
  for (double v : {errp_amplitude_uv, motion_artifact_gain, motion_artifact_uv, pupil_dilation_mm, blink_rate_hz,
                   rr_jitter_ms, rr_error_shortening_ms, motion_rr_ms}) {
    if (!finite_nonneg(v)) {
      throw ValidationError("synth gains and rates must be finite and non-negative");
    }
  }
  if (!(error_saccade_probability >= 0.0 && error_saccade_probability <= 1.0)) {
    throw ValidationError("error_saccade_probability must lie in [0, 1]");
  }
}

double default_motion_gain(Environment env) {
  switch (env) {
  case Environment::baseline: return 0.0;
  case Environment::straight_level: return 1.0;
  case Environment::two_g: return 2.0;
  }
  return 0.0;
}

double expected_error_count(Environment env, Difficulty difficulty) {
  // Rows: low, medium, high. Columns: baseline, straight-and-level, 2G.
  static constexpr double table[3][3] = {{5.0, 5.0, 5.0}, {8.0, 8.0, 13.0}, {29.0, 37.0, 40.0}};
  return table[static_cast<int>(difficulty)][static_cast<int>(env)];
}

void ErrpTemplate::validate(std::size_t n_channels) const {
  for (double lat : {ne_latency_s, pe_latency_s}) {
    if (!(lat > 0.0 && lat < 1.0)) throw ValidationError("ErrP latencies must lie in (0, 1) s");
  }
  if (!(ne_width_s > 0.0 && pe_width_s > 0.0)) {
    throw ValidationError("ErrP widths must be positive");
  }
  if (channel_weights.size() != n_channels) {
    throw ValidationError("ErrP template needs one weight per channel");
  }
  for (double w : channel_weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("ErrP channel weights must lie in [0, 1]");
  }
}

std::span<const std::string> eeg_montage() { return kMontage; }

std::vector<double> errp_channel_weights() { return kErrpWeights; }

ErrpTemplate default_errp_template(double pe_amplitude_uv, double ne_ratio) {
  ErrpTemplate t;
  t.pe_amplitude = pe_amplitude_uv;
  t.ne_amplitude = -ne_ratio * pe_amplitude_uv;
  t.channel_weights = kErrpWeights;
  return t;
}

EventLog generate_events(const SynthConfig& cfg, double block_start_s) {
  cfg.validate();
  const double end = block_start_s + cfg.block_duration_s;
  const double error_rate = expected_error_count(cfg.environment, cfg.difficulty) / 180.0;
  const double task_rate = 3.0 * error_rate + 0.1;
  static constexpr Task tasks[] = {Task::radio_comms, Task::ground_threats, Task::warnings_panel};

  EventLog log;
  auto draw = [&](EventKind kind, double rate, std::uint64_t seed) {
    if (!(rate > 0.0)) return;
    Rng rng(seed);
    double t = block_start_s + rng.exponential(rate);
    while (t < end) {
      const double rounded = round_us(t);
      if (rounded < end) {
        log.events.push_back({rounded, kind, tasks[rng.below(3)], cfg.difficulty, cfg.environment,
                              cfg.participant_id});
      }
      t += rng.exponential(rate);
    }
  };
  draw(EventKind::error, error_rate, derive_seed(cfg.seed, "errors"));
  draw(EventKind::non_error, task_rate, derive_seed(cfg.seed, "tasks"));
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
  return log;
}

EmbedResult embed_errp(const SampledSignal& eeg, const EventLog& events, const ErrpTemplate& tmpl) {
  tmpl.validate(eeg.n_channels());
  EmbedResult r{eeg, 0};
  const double ne_sigma = tmpl.ne_width_s * kFwhmToSigma;
  const double pe_sigma = tmpl.pe_width_s * kFwhmToSigma;
  for (const Event& e : events.events) {
    if (e.kind != EventKind::error) continue;
    if (e.time_s < eeg.start_epoch_s || e.time_s + 1.0 > eeg.end_epoch_s()) {
      ++r.skipped;
      continue;
    }
    for (std::size_t c = 0; c < eeg.n_channels(); ++c) {
      const double w = tmpl.channel_weights[c];
      if (w == 0.0) continue;
      add_bump(r.signal.samples[c], eeg.rate_hz, eeg.start_epoch_s, e.time_s + tmpl.ne_latency_s, ne_sigma,
               w * tmpl.ne_amplitude);
      add_bump(r.signal.samples[c], eeg.rate_hz, eeg.start_epoch_s, e.time_s + tmpl.pe_latency_s, pe_sigma,
               w * tmpl.pe_amplitude);
    }
  }
  return r;
}

std::vector<double> synth_ecg_from_beats(std::span<const double> beat_times_s, double rate_hz, std::size_t n_samples,
                                         double start_epoch_s) {
  struct Wave {
    double offset_s, amplitude_mv, sigma_s;
  };
  static constexpr Wave waves[] = {
      {-0.20, 0.15, 0.025}, {-0.03, -0.12, 0.010}, {0.0, 1.00, 0.010}, {0.03, -0.25, 0.010}, {0.25, 0.30, 0.040}};
  std::vector<double> x(n_samples, 0.0);
  for (double beat : beat_times_s) {
    for (const Wave& w : waves) {
      add_bump(x, rate_hz, start_epoch_s, beat + w.offset_s, w.sigma_s, w.amplitude_mv);
    }
  }
  return x;
}

SessionBundle generate_session(std::span<const SynthConfig> blocks) {
  if (blocks.empty()) {
    throw ValidationError("a session needs at least one block");
  }
  const SynthConfig& first = blocks.front();
  std::uint64_t session_seed = 0x5E55104ull;
  for (const SynthConfig& cfg : blocks) {
    cfg.validate();
    if (cfg.participant_id != first.participant_id || cfg.environment != first.environment ||
        cfg.eye_tracking != first.eye_tracking) {
      throw ValidationError("session blocks must share participant, environment and eye-tracking availability");
    }
    session_seed = splitmix64(session_seed ^ cfg.seed);
  }

  SessionBundle b;
  b.participant_id = first.participant_id;
  b.environment = first.environment;
  BlockTable table;
  double t = 0.0;
  for (const SynthConfig& cfg : blocks) {
    b.blocks.push_back({t, t + cfg.block_duration_s, cfg.difficulty});
    table.starts.push_back(t);
    table.cfgs.push_back(&cfg);
    const EventLog log = generate_events(cfg, t);
    b.events.events.insert(b.events.events.end(), log.events.begin(), log.events.end());
    t += cfg.block_duration_s;
  }
  const double total_s = t;
  const std::vector<double> errors = b.events.times(EventKind::error);

  // EEG: pink background per channel, motion artefact, then ErrPs.
  {
    Rng rng(derive_seed(session_seed, "eeg"));
    const auto n = static_cast<std::size_t>(std::llround(total_s * kEegRateHz));
    b.eeg.rate_hz = kEegRateHz;
    b.eeg.start_epoch_s = 0.0;
    b.eeg.channel_labels.assign(kMontage.begin(), kMontage.end());
    const bool any_motion = std::any_of(blocks.begin(), blocks.end(), [](const SynthConfig& c) {
      return c.motion_artifact_gain * c.motion_artifact_uv > 0.0;
    });
    for (std::size_t c = 0; c < kMontage.size(); ++c) {
      auto ch = pink_noise(rng, n, kEegRateHz);
      std::vector<double> motion;
      if (any_motion) motion = motion_noise(rng, n, kEegRateHz);
      for (std::size_t i = 0; i < n; ++i) {
        const SynthConfig& cfg = table.at(static_cast<double>(i) / kEegRateHz);
        ch[i] *= cfg.noise_sigma_uv;
        if (any_motion) ch[i] += cfg.motion_artifact_gain * cfg.motion_artifact_uv * motion[i];
      }
      b.eeg.samples.push_back(std::move(ch));
    }
    // Per-block amplitudes: embed each block's errors with its own template.
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      EventLog block_events;
      for (const Event& e : b.events.events) {
        if (e.time_s >= b.blocks[k].t_start_s && e.time_s < b.blocks[k].t_end_s) block_events.events.push_back(e);
      }
      b.eeg = embed_errp(b.eeg, block_events, default_errp_template(blocks[k].errp_amplitude_uv)).signal;
    }
  }

  // ECG: beat train with jitter, slow motion-driven modulation and a
  // post-error shortening of the next intervals.
  {
    Rng rng(derive_seed(session_seed, "ecg"));
    const auto n = static_cast<std::size_t>(std::llround(total_s * kEcgRateHz));
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    std::vector<double> beats;
    double tb = rng.uniform(0.0, first.mean_rr_ms / 1000.0);
    while (tb < total_s) {
      beats.push_back(tb);
      const SynthConfig& cfg = table.at(tb);
      double rr = cfg.mean_rr_ms + cfg.rr_jitter_ms * rng.normal() +
                  cfg.motion_artifact_gain * cfg.motion_rr_ms * std::sin(2.0 * kPi * 0.1 * tb + phase);
      auto it = std::upper_bound(errors.begin(), errors.end(), tb);
      if (it != errors.begin() && tb - *std::prev(it) < 2.0) {
        rr -= cfg.rr_error_shortening_ms;
      }
      tb += std::max(rr, 300.0) / 1000.0;
    }
    b.ecg.rate_hz = kEcgRateHz;
    b.ecg.channel_labels = {"ECG"};
    auto x = synth_ecg_from_beats(beats, kEcgRateHz, n);
    const double wander_phase = rng.uniform(0.0, 2.0 * kPi);
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = static_cast<double>(i) / kEcgRateHz;
      const SynthConfig& cfg = table.at(ti);
      x[i] += 0.05 * std::sin(2.0 * kPi * 0.25 * ti + wander_phase) + 0.02 * rng.normal() +
              0.03 * cfg.motion_artifact_gain * rng.normal();
    }
    b.ecg.samples.push_back(std::move(x));
  }

  if (first.eye_tracking) {
    Rng rng(derive_seed(session_seed, "eye"));
    const auto n = static_cast<std::size_t>(std::llround(total_s * kGazeRateHz));
    std::vector<double> forced;
    for (double te : errors) {
      const double onset = te + rng.uniform(0.15, 0.35);
      if (rng.uniform() < table.at(te).error_saccade_probability) forced.push_back(onset);
    }
    const auto saccades = plan_saccades(rng, total_s, forced);

    std::vector<double> gx(n), gy(n);
    std::size_t s = 0;
    double fx = saccades.empty() ? 0.0 : saccades.front().x0;
    double fy = saccades.empty() ? 0.0 : saccades.front().y0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = static_cast<double>(i) / kGazeRateHz;
      while (s < saccades.size() && ti >= saccades[s].onset + saccades[s].duration) {
        fx = saccades[s].x1;
        fy = saccades[s].y1;
        ++s;
      }
      double x = fx;
      double y = fy;
      if (s < saccades.size() && ti >= saccades[s].onset) {
        const Saccade& sc = saccades[s];
        const double u = 0.5 * (1.0 - std::cos(kPi * (ti - sc.onset) / sc.duration));
        x = sc.x0 + u * (sc.x1 - sc.x0);
        y = sc.y0 + u * (sc.y1 - sc.y0);
      }
      const double noise = 0.03 * (1.0 + 0.5 * table.at(ti).motion_artifact_gain);
      gx[i] = x + noise * rng.normal();
      gy[i] = y + noise * rng.normal();
    }

    // Pupil: participant baseline, slow drift, post-error dilation.
    std::vector<double> pupil(n);
    const double base = 3.5 + rng.uniform(-0.4, 0.4);
    double drift_f[3], drift_p[3];
    for (int k = 0; k < 3; ++k) {
      drift_f[k] = rng.uniform(0.005, 0.03);
      drift_p[k] = rng.uniform(0.0, 2.0 * kPi);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = static_cast<double>(i) / kGazeRateHz;
      double v = base;
      for (int k = 0; k < 3; ++k) v += 0.05 * std::sin(2.0 * kPi * drift_f[k] * ti + drift_p[k]);
      pupil[i] = v + 0.001 * rng.normal();
    }
    constexpr double kResponseLatency = 0.2;
    constexpr double kResponsePeak = 0.8;
    for (double te : errors) {
      const double amp = table.at(te).pupil_dilation_mm;
      if (amp == 0.0) continue;
      const auto lo = static_cast<std::size_t>(std::ceil((te + kResponseLatency) * kGazeRateHz));
      const auto hi = std::min(n, static_cast<std::size_t>((te + kResponseLatency + 6.0 * kResponsePeak) * kGazeRateHz));
      for (std::size_t i = lo; i < hi; ++i) {
        const double u = (static_cast<double>(i) / kGazeRateHz - te - kResponseLatency) / kResponsePeak;
        const double g = u * std::exp(1.0 - u);
        pupil[i] += amp * g * g;
      }
    }

    // Blinks: non-overlapping dropouts of 70-450 ms in gaze and pupil.
    const double blink_rate = first.blink_rate_hz;
    if (blink_rate > 0.0) {
      double tb = rng.exponential(blink_rate);
      while (tb < total_s) {
        const double dur = rng.uniform(0.07, 0.45);
        const auto lo = static_cast<std::size_t>(std::ceil(tb * kGazeRateHz - 1e-9));
        const auto hi = std::min(n, static_cast<std::size_t>(std::ceil((tb + dur) * kGazeRateHz - 1e-9)));
        for (std::size_t i = lo; i < hi; ++i) {
          gx[i] = gy[i] = pupil[i] = kNaN;
        }
        tb += dur + 0.05 + rng.exponential(blink_rate);
      }
    }

    SampledSignal gaze;
    gaze.rate_hz = kGazeRateHz;
    gaze.channel_labels = {"x_deg", "y_deg"};
    gaze.samples = {std::move(gx), std::move(gy)};
    SampledSignal pupil_sig;
    pupil_sig.rate_hz = kGazeRateHz;
    pupil_sig.channel_labels = {"pupil_mm"};
    pupil_sig.samples = {std::move(pupil)};
    b.gaze = std::move(gaze);
    b.pupil = std::move(pupil_sig);
  }

  b.validate();
  return b;
}

} // namespace errsense
