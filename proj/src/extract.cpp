#include "errsense/error.hpp"
#include "errsense/features.hpp"

#include <algorithm>
#include <cmath>

namespace errsense {

namespace {

void push(FeatureVector& fv, double v) { fv.values.push_back(v); }

FeatureVector eeg_window(const PreprocessedSession& s, double t, const FeatureConfig& cfg) {
  const SampledSignal w = slice_window(s.eeg, t, cfg.window_s);
  FeatureVector fv;
  fv.modality = Modality::eeg;
  fv.names = feature_names(Modality::eeg, cfg, w.channel_labels);
  fv.values.reserve(fv.names.size());
  for (const auto& ch : w.samples) {
    for (double p : psd_band_powers(ch, w.rate_hz).as_array()) push(fv, p);
    const Moments m = stat_moments(ch);
    push(fv, m.mean);
    push(fv, m.variance);
    push(fv, m.skewness);
    push(fv, m.kurtosis);
    const Morphology mo = morphological(ch);
    push(fv, mo.curve_length);
    push(fv, mo.peak_count);
    push(fv, mo.nonlinear_energy);
    for (double e : wavelet_energies(ch, cfg.wavelet_levels)) push(fv, e);
    const auto ar = ar_coefficients(ch);
    push(fv, ar[0]);
    push(fv, ar[1]);
    push(fv, approximate_entropy(ch, cfg.apen_m, cfg.apen_r_factor));
    push(fv, hurst_exponent(ch).value);
  }
  return fv;
}

FeatureVector et_window(const PreprocessedSession& s, double t, const FeatureConfig& cfg) {
  if (!s.has_eye_tracking) {
    throw DegenerateInputError("session has no eye-tracking streams");
  }
  const SampledSignal gaze = slice_window(s.gaze, t, cfg.window_s);
  const std::size_t first = time_to_index(s.gaze, t);
  const std::span<const double> velocity(s.gaze_velocity_dps.data() + first, gaze.n_samples());
  const GazeFeatures g = gaze_features(gaze, velocity, cfg.saccade_threshold_dps, cfg.min_fixation_ms);

  const SampledSignal pupil = slice_window(s.pupil, t, cfg.window_s);
  const BlinkFeatures b = blink_features(pupil.samples[0], pupil.rate_hz, cfg.blink_min_ms, cfg.blink_max_ms);
  std::vector<double> valid;
  for (double v : pupil.samples[0]) {
    if (!std::isnan(v)) valid.push_back(v);
  }
  if (valid.empty()) {
    throw DegenerateInputError("pupil window has no valid samples");
  }
  const Moments pm = stat_moments(valid);

  FeatureVector fv;
  fv.modality = Modality::et;
  fv.names = feature_names(Modality::et, cfg);
  fv.values = {g.saccade_count,         g.mean_saccade_peak_velocity_dps,
               g.fixation_count,        g.mean_fixation_duration_ms,
               g.total_fixation_time_ms, g.gaze_dispersion_deg,
               b.blink_count,           b.mean_blink_duration_ms,
               pm.mean,                 std::sqrt(pm.variance)};
  return fv;
}

FeatureVector ecg_window(const PreprocessedSession& s, double t, const FeatureConfig& cfg) {
  const SampledSignal w = slice_window(s.ecg, t, cfg.window_s);
  const EcgStats st = ecg_stats(w.samples[0]);
  const double t_end = t + cfg.window_s;
  const double t_from = cfg.ecg_context_s > 0.0 ? t_end - cfg.ecg_context_s : t;
  const auto& peaks = s.r_peaks.peak_times_s;
  const auto lo = std::lower_bound(peaks.begin(), peaks.end(), t_from);
  const auto hi = std::lower_bound(peaks.begin(), peaks.end(), t_end);
  std::vector<double> intervals;
  for (auto it = lo; it != hi && std::next(it) != hi; ++it) {
    intervals.push_back((*std::next(it) - *it) * 1000.0);
  }
  RrMetrics rr = rr_metrics(intervals);
  if (cfg.ecg_context_s > 0.0) {
    if (!(s.session_mean_rr_ms > 0.0)) {
      throw DegenerateInputError("session has no RR intervals to normalise by");
    }
    rr.mean_rr_ms /= s.session_mean_rr_ms;
    rr.sdnn_ms /= s.session_mean_rr_ms;
  }
  FeatureVector fv;
  fv.modality = Modality::ecg;
  fv.names = feature_names(Modality::ecg, cfg);
  fv.values = {st.mean, st.std, st.skewness, st.kurtosis, rr.mean_rr_ms, rr.sdnn_ms, rr.cv};
  return fv;
}

} // namespace

std::vector<std::string> feature_names(Modality modality, const FeatureConfig& cfg,
                                       std::span<const std::string> eeg_channels) {
  std::vector<std::string> names;
  switch (modality) {
  case Modality::eeg: {
    std::vector<std::string> per_channel = {"delta",        "theta",     "alpha",         "beta",
                                            "gamma",        "mean",      "variance",      "skewness",
                                            "kurtosis_excess", "curve_length", "peak_count", "nonlinear_energy"};
    for (std::size_t l = 1; l <= cfg.wavelet_levels; ++l) per_channel.push_back("wavelet_d" + std::to_string(l));
    per_channel.push_back("wavelet_a" + std::to_string(cfg.wavelet_levels));
    for (const char* s : {"ar1", "ar2", "apen", "hurst"}) per_channel.emplace_back(s);
    for (const auto& ch : eeg_channels) {
      for (const auto& f : per_channel) names.push_back(ch + "_" + f);
    }
    break;
  }
  case Modality::et:
    names = {"saccade_count",      "saccade_peak_velocity_mean_dps", "fixation_count", "fixation_duration_mean_ms",
             "fixation_time_total_ms", "gaze_dispersion_deg",        "blink_count",    "blink_duration_mean_ms",
             "pupil_mean_mm",      "pupil_std_mm"};
    break;
  case Modality::ecg:
    names = {"ecg_mean", "ecg_std", "ecg_skewness", "ecg_kurtosis_excess"};
    if (cfg.ecg_context_s > 0.0) {
      names.insert(names.end(), {"rr_mean_norm", "rr_sdnn_norm", "rr_cv"});
    } else {
      names.insert(names.end(), {"rr_mean_ms", "rr_sdnn_ms", "rr_cv"});
    }
    break;
  }
  return names;
}

PreprocessedSession preprocess_session(const SessionBundle& bundle, const PreprocessConfig& pre,
                                       const FeatureConfig& feat, std::span<const Modality> modalities) {
  PreprocessedSession s;
  s.participant_id = bundle.participant_id;
  s.environment = bundle.environment;
  auto wants = [&](Modality m) { return std::find(modalities.begin(), modalities.end(), m) != modalities.end(); };
  if (wants(Modality::eeg)) {
    s.eeg = preprocess_eeg(bundle.eeg, pre);
  }
  if (wants(Modality::ecg)) {
    s.ecg = preprocess_ecg(bundle.ecg, pre);
    s.r_peaks = detect_r_peaks(s.ecg, feat.r_peaks);
    if (!s.r_peaks.intervals_ms.empty()) {
      double sum = 0.0;
      for (double v : s.r_peaks.intervals_ms) sum += v;
      s.session_mean_rr_ms = sum / static_cast<double>(s.r_peaks.intervals_ms.size());
    }
  }
  if (wants(Modality::et) && bundle.has_eye_tracking()) {
    s.has_eye_tracking = true;
    s.gaze = preprocess_gaze(*bundle.gaze, pre);
    s.gaze_velocity_dps = three_point_velocity(s.gaze, pre.velocity_window_ms);
    s.pupil = clean_pupil(*bundle.pupil, pre.pupil).pupil;
  }
  return s;
}

WindowFeatures extract_window_features(const PreprocessedSession& session, Modality modality, double t_start_s,
                                       const FeatureConfig& cfg) {
  WindowFeatures out;
  try {
    switch (modality) {
    case Modality::eeg: out.features = eeg_window(session, t_start_s, cfg); break;
    case Modality::et: out.features = et_window(session, t_start_s, cfg); break;
    case Modality::ecg: out.features = ecg_window(session, t_start_s, cfg); break;
    }
  } catch (const DegenerateInputError& e) {
    out.flagged = true;
    out.reason = e.what();
    out.features.modality = modality;
    return out;
  }
  for (std::size_t i = 0; i < out.features.values.size(); ++i) {
    if (!std::isfinite(out.features.values[i])) {
      out.flagged = true;
      out.reason = "non-finite " + out.features.names[i];
      break;
    }
  }
  return out;
}

} // namespace errsense
