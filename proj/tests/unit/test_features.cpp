#include "errsense/error.hpp"
#include "errsense/features.hpp"
#include "errsense/oracles.hpp"
#include "errsense/synth.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace errsense;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> sine(double f, double rate, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * f * static_cast<double>(i) / rate);
  return x;
}

double total(const BandPowers& b) {
  const auto a = b.as_array();
  return std::accumulate(a.begin(), a.end(), 0.0);
}
} // namespace

TEST_CASE("band powers of pure tones") {
  const auto alpha = psd_band_powers(sine(10.0, 256.0, 256, 2.0), 256.0);
  CHECK(alpha.alpha >= 0.95 * total(alpha));
  const auto delta = psd_band_powers(sine(2.0, 256.0, 256), 256.0);
  CHECK(delta.delta > delta.theta);
  CHECK(delta.gamma < 0.01 * total(delta));
  const auto zero = psd_band_powers(std::vector<double>(256, 0.0), 256.0);
  CHECK(total(zero) == 0.0);
  CHECK_THROWS_AS(psd_band_powers(std::vector<double>(200, 0.0), 256.0), LengthError);
}

TEST_CASE("band powers match the direct DFT") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = testing::white_noise(256, 100 + s);
    const auto a = psd_band_powers(x, 256.0).as_array();
    const auto b = oracle::dft_band_powers(x, 256.0).as_array();
    for (int k = 0; k < 5; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-6));
  }
}

TEST_CASE("periodogram satisfies Parseval with the Hann correction") {
  const auto x = testing::white_noise(256, 7);
  const auto psd = hann_periodogram(x, 256.0);
  double spectral = 0.0;
  for (double p : psd) spectral += p * 1.0; // df = 1 Hz
  // sum |X_k|^2 over all bins = N sum (w x)^2, so the one-sided integral is
  // sum (w x)^2 / sum w^2 when normalised by rate * sum w^2.
  double wx2 = 0.0, w2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / 256.0);
    wx2 += w * w * x[i] * x[i];
    w2 += w * w;
  }
  CHECK(spectral == doctest::Approx(wx2 / w2 * 256.0 / 256.0).epsilon(1e-6));
}

TEST_CASE("moments") {
  const auto m = stat_moments(std::vector<double>{0, 1, 0, 1});
  CHECK(m.mean == 0.5);
  CHECK(m.variance == 0.25);
  CHECK(m.skewness == 0.0);
  CHECK(m.kurtosis == doctest::Approx(-2.0));
  const auto c = stat_moments(std::vector<double>(10, 3.0));
  CHECK(c.mean == 3.0);
  CHECK(c.variance == 0.0);
  CHECK(c.skewness == 0.0);
  CHECK(c.kurtosis == 0.0);
  const auto n = stat_moments(testing::white_noise(100000, 1));
  CHECK(std::abs(n.skewness) < 0.05);
  CHECK(std::abs(n.kurtosis) < 0.1);
}

TEST_CASE("morphology") {
  const auto m = morphological(std::vector<double>{0, 1, 0, 1, 0});
  CHECK(m.curve_length == 4.0);
  CHECK(m.peak_count == 2.0);
  const auto c = morphological(std::vector<double>(8, 2.0));
  CHECK(c.curve_length == 0.0);
  CHECK(c.peak_count == 0.0);
  CHECK(c.nonlinear_energy == 0.0);
  // Teager energy of A sin(w n) is exactly A^2 sin^2(w).
  const double w = 0.05, A = 3.0;
  std::vector<double> s(500);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = A * std::sin(w * static_cast<double>(i));
  CHECK(morphological(s).nonlinear_energy == doctest::Approx(A * A * std::sin(w) * std::sin(w)).epsilon(1e-9));
}

TEST_CASE("wavelet energies") {
  for (double e : wavelet_energies(std::vector<double>(256, 0.0))) CHECK(e == 0.0);
  const auto x = testing::white_noise(256, 2);
  const auto e = wavelet_energies(x, 4);
  REQUIRE(e.size() == 5);
  double ex = 0.0;
  for (double v : x) ex += v * v;
  CHECK(std::accumulate(e.begin(), e.end(), 0.0) == doctest::Approx(ex).epsilon(1e-6));

  std::vector<double> alt(256);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  const auto a = wavelet_energies(alt, 4);
  CHECK(a[0] > 0.8 * std::accumulate(a.begin(), a.end(), 0.0));
  CHECK_THROWS_AS(wavelet_energies(std::vector<double>(8, 1.0), 4), LengthError);
}

TEST_CASE("AR(2) Yule-Walker estimates") {
  Rng rng(3);
  std::vector<double> x(100000);
  double prev = 0.0;
  for (double& v : x) v = prev = 0.5 * prev + rng.normal();
  const auto a = ar_coefficients(x);
  CHECK(std::abs(a[0] - 0.5) <= 0.02);
  CHECK(std::abs(a[1]) <= 0.02);
  const auto w = ar_coefficients(testing::white_noise(100000, 4));
  CHECK(std::abs(w[0]) <= 0.02);
  CHECK(std::abs(w[1]) <= 0.02);
  CHECK_THROWS_AS(ar_coefficients(std::vector<double>(64, 1.0)), DegenerateInputError);
}

TEST_CASE("approximate entropy") {
  CHECK(approximate_entropy(std::vector<double>(128, 1.0)) == 0.0);
  int wins = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    std::vector<double> periodic(256), noise(256);
    Rng rng(s);
    for (std::size_t i = 0; i < 256; ++i) {
      periodic[i] = static_cast<double>(i % 2);
      noise[i] = rng.uniform();
    }
    wins += approximate_entropy(periodic) < approximate_entropy(noise);
    CHECK(approximate_entropy(noise) == doctest::Approx(oracle::naive_apen(noise, 2, 0.2)).epsilon(1e-9));
  }
  CHECK(wins >= 38);
}

TEST_CASE("Hurst exponent") {
  // R/S over chunks of 8..64 is biased upward for white noise. The expected slope
  // comes from the Anis-Lloyd small-sample mean of R/S.
  auto anis_lloyd = [](double n) {
    double s = 0.0;
    for (double i = 1; i < n; ++i) s += std::sqrt((n - i) / i);
    return std::exp(std::lgamma((n - 1) / 2) - std::lgamma(n / 2)) / std::sqrt(std::numbers::pi) * s;
  };
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double n : {8.0, 16.0, 32.0, 64.0}) {
    const double lx = std::log(n), ly = std::log(anis_lloyd(n));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double expected = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
  CHECK(expected == doctest::Approx(0.5905).epsilon(1e-3));
  double mean_h = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) mean_h += hurst_exponent(testing::white_noise(4096, s)).value / 20;
  CHECK(std::abs(mean_h - expected) <= 0.02);
  CHECK(std::abs(mean_h - 0.5) <= 0.1);
  const auto w = testing::white_noise(4096, 5);
  std::vector<double> walk(w.size());
  std::partial_sum(w.begin(), w.end(), walk.begin());
  CHECK(std::abs(hurst_exponent(walk).value - 1.0) <= 0.15);
  CHECK_THROWS_AS(hurst_exponent(std::vector<double>(256, 1.0)), DegenerateInputError);
}

TEST_CASE("gaze features") {
  SampledSignal g;
  g.rate_hz = 100.0;
  g.channel_labels = {"x_deg", "y_deg"};
  g.samples = {std::vector<double>(100, 2.0), std::vector<double>(100, -1.0)};
  std::vector<double> v(100, 0.0);
  const auto still = gaze_features(g, v);
  CHECK(still.saccade_count == 0);
  CHECK(still.fixation_count == 1);
  CHECK(still.mean_fixation_duration_ms == doctest::Approx(1000.0));
  CHECK(still.gaze_dispersion_deg == 0.0);

  std::vector<double> jumps(100, 0.0);
  jumps[30] = jumps[31] = 500.0;
  jumps[70] = jumps[71] = 500.0;
  CHECK(gaze_features(g, jumps).saccade_count == 2);
  CHECK(gaze_features(g, jumps).mean_saccade_peak_velocity_dps == 500.0);

  g.samples = {std::vector<double>(100, NAN), std::vector<double>(100, NAN)};
  CHECK_THROWS_AS(gaze_features(g, std::vector<double>(100, NAN)), DegenerateInputError);
}

TEST_CASE("blink features") {
  std::vector<double> p(100, 3.0);
  const auto none = blink_features(p, 100.0);
  CHECK(none.blink_count == 0);
  CHECK(none.mean_blink_duration_ms == 0);
  for (int i = 20; i < 30; ++i) p[i] = NAN;
  const auto one = blink_features(p, 100.0);
  CHECK(one.blink_count == 1);
  CHECK(one.mean_blink_duration_ms == doctest::Approx(100.0));
  std::vector<double> longer(100, 3.0);
  for (int i = 20; i < 70; ++i) longer[i] = NAN;
  CHECK(blink_features(longer, 100.0).blink_count == 0);
}

TEST_CASE("R-peak detection") {
  std::vector<double> beats;
  for (double t = 0.4; t < 60.0; t += 0.8) beats.push_back(t);
  const auto clean = synth_ecg_from_beats(beats, 130.0, 130 * 60);
  const auto rr = detect_r_peaks(testing::single(clean, 130.0, "ECG"));
  REQUIRE(rr.intervals_ms.size() >= beats.size() - 2);
  for (double v : rr.intervals_ms) CHECK(std::abs(v - 800.0) <= 1000.0 / 130.0);

  CHECK(detect_r_peaks(testing::single(std::vector<double>(1300, 0.0), 130.0)).peak_times_s.empty());
}

TEST_CASE("R-peak recovery at 10 dB SNR") {
  std::vector<double> beats;
  for (double t = 0.3; t < 120.0; t += 0.6) beats.push_back(t);
  const auto clean = synth_ecg_from_beats(beats, 130.0, 130 * 120);
  double power = 0.0;
  for (double v : clean) power += v * v;
  power /= static_cast<double>(clean.size());
  const double sigma = std::sqrt(power / 10.0);
  auto noisy = clean;
  const auto n = testing::white_noise(clean.size(), 8);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += sigma * n[i];
  const auto rr = detect_r_peaks(testing::single(noisy, 130.0, "ECG"));
  std::size_t found = 0;
  for (double b : beats) {
    for (double p : rr.peak_times_s) {
      if (std::abs(p - b) <= 0.05) {
        ++found;
        break;
      }
    }
  }
  CHECK(static_cast<double>(found) >= 0.98 * static_cast<double>(beats.size()));
}

TEST_CASE("RR metrics") {
  const auto a = rr_metrics(std::vector<double>{800, 800, 800});
  CHECK(a.mean_rr_ms == 800);
  CHECK(a.sdnn_ms == 0);
  CHECK(a.cv == 0);
  const auto b = rr_metrics(std::vector<double>{700, 900});
  CHECK(b.mean_rr_ms == doctest::Approx(800));
  CHECK(b.sdnn_ms == doctest::Approx(141.421356));
  CHECK(b.cv == doctest::Approx(0.176777).epsilon(1e-5));
  const auto c = rr_metrics(std::vector<double>{1400, 1800});
  CHECK(c.sdnn_ms == doctest::Approx(2 * b.sdnn_ms));
  CHECK(c.cv == doctest::Approx(b.cv));
  CHECK_THROWS_AS(rr_metrics(std::vector<double>{800}), DegenerateInputError);
}

TEST_CASE("ECG window statistics") {
  const auto c = ecg_stats(std::vector<double>(20, 1.5));
  CHECK(c.mean == 1.5);
  CHECK(c.std == 0.0);
  const auto a = ecg_stats(std::vector<double>{0, 1, 0, 1});
  CHECK(a.mean == 0.5);
  CHECK(a.std == 0.5);
  CHECK(a.kurtosis == doctest::Approx(-2.0));
  const auto x = testing::white_noise(300, 9);
  CHECK(ecg_stats(x).std == doctest::Approx(std::sqrt(stat_moments(x).variance)).epsilon(1e-12));
}

TEST_CASE("feature inventory and window extraction") {
  FeatureConfig cfg;
  const auto montage = eeg_montage();
  const auto names = feature_names(Modality::eeg, cfg, montage);
  CHECK(names.size() == 504);
  CHECK(names == feature_names(Modality::eeg, cfg, montage));

  const auto b = testing::small_session(21, 30.0);
  const std::vector<Modality> mods{Modality::eeg, Modality::et, Modality::ecg};
  const auto ps = preprocess_session(b, PreprocessConfig{}, cfg, mods);
  const auto eeg = extract_window_features(ps, Modality::eeg, 20.0, cfg);
  CHECK_FALSE(eeg.flagged);
  CHECK(eeg.features.values.size() == 504);
  const auto et = extract_window_features(ps, Modality::et, 20.0, cfg);
  CHECK(et.features.names == feature_names(Modality::et, cfg));
  const auto ecg = extract_window_features(ps, Modality::ecg, 20.0, cfg);
  CHECK_FALSE(ecg.flagged);
  CHECK(ecg.features.names == feature_names(Modality::ecg, cfg));
}

TEST_CASE("ECG window without beats and without context is flagged") {
  FeatureConfig cfg;
  cfg.ecg_context_s = 0.0;
  SessionBundle b = testing::small_session(22, 30.0, false);
  for (auto& v : b.ecg.samples[0]) v = 0.0;
  const std::vector<Modality> mods{Modality::ecg};
  const auto ps = preprocess_session(b, PreprocessConfig{}, cfg, mods);
  CHECK(extract_window_features(ps, Modality::ecg, 5.0, cfg).flagged);
}
