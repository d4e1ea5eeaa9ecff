#include "errsense/error.hpp"
#include "errsense/fir.hpp"
#include "errsense/oracles.hpp"
#include "errsense/preprocess.hpp"
#include "errsense/synth.hpp"
#include "errsense/wavelet.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace errsense;

namespace {
constexpr double kPi = std::numbers::pi;

FirKernel eeg_kernel() { return design_fir_bandpass(0.5, 50.0, 0.1, 0.5, 256.0); }
FirKernel ecg_kernel() { return design_fir_bandpass(0.5, 40.0, 0.1, 0.5, 130.0); }

std::vector<double> sine(double f, double rate, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * f * static_cast<double>(i) / rate);
  return x;
}
} // namespace

TEST_CASE("tap count follows the Hamming rule") {
  const auto k = eeg_kernel();
  // 3.3 * 256 / 0.1 = 8448 -> next odd 8449
  CHECK(k.size() == 8449);
  CHECK(ecg_kernel().size() == 4291);
  for (std::size_t i = 0; i < k.size(); ++i) REQUIRE(k.taps[i] == doctest::Approx(k.taps[k.size() - 1 - i]));
}

TEST_CASE("EEG and ECG kernel responses by direct DTFT") {
  const auto e = eeg_kernel();
  CHECK(std::abs(oracle::dtft_gain_db(e.taps, 10.0, 256.0)) <= 1.0);
  CHECK(oracle::dtft_gain_db(e.taps, 0.0, 256.0) <= -40.0);
  const auto c = ecg_kernel();
  CHECK(oracle::dtft_gain_db(c.taps, 45.0, 130.0) <= -40.0);
  CHECK(fir_gain_db(c.taps, 45.0, 130.0) == doctest::Approx(oracle::dtft_gain_db(c.taps, 45.0, 130.0)).epsilon(1e-6));

  for (const auto* k : {&e, &c}) {
    const auto r = oracle::probe_filter(*k, 1000);
    CHECK(r.max_passband_deviation_db <= 1.0);
    CHECK(r.max_stopband_gain_db <= -40.0);
  }
}

TEST_CASE("invalid band edges are rejected") {
  CHECK_THROWS_AS(design_fir_bandpass(0.5, 200.0, 0.1, 0.5, 256.0), ParameterError);
  CHECK_THROWS_AS(design_fir_bandpass(10.0, 5.0, 0.1, 0.5, 256.0), ParameterError);
  CHECK_THROWS_AS(design_fir_bandpass(0.5, 50.0, 0.0, 0.5, 256.0), ParameterError);
}

TEST_CASE("zero-phase filtering preserves a 10 Hz sine") {
  const auto k = eeg_kernel();
  const auto x = sine(10.0, 256.0, 256 * 120);
  const auto y = filter_zero_phase(x, k.taps);
  REQUIRE(y.size() == x.size());
  // Least-squares fit of a*sin + b*cos over the interior.
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = x.size() / 4; i < 3 * x.size() / 4; ++i) {
    const double s = std::sin(2.0 * kPi * 10.0 * i / 256.0), c = std::cos(2.0 * kPi * 10.0 * i / 256.0);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    ys += y[i] * s;
    yc += y[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det, b = (yc * ss - ys * sc) / det;
  CHECK(std::hypot(a, b) == doctest::Approx(1.0).epsilon(0.02));
  const double phase_samples = std::atan2(b, a) / (2.0 * kPi * 10.0) * 256.0;
  CHECK(std::abs(phase_samples) < 1.0);
  CHECK(oracle::zero_phase_lag(k.taps, 4.0, 256.0, x.size()) == 0);
}

TEST_CASE("bandpass removes a DC offset and answers an impulse symmetrically") {
  const auto k = eeg_kernel();
  std::vector<double> dc(256 * 120, 5.0);
  const auto y = filter_zero_phase(dc, k.taps);
  double worst = 0.0;
  for (double v : y) worst = std::max(worst, std::abs(v));
  CHECK(worst < 0.05);

  const auto kc = ecg_kernel();
  std::vector<double> imp(20001, 0.0);
  imp[10000] = 1.0;
  const auto r = filter_zero_phase(imp, kc.taps);
  for (std::size_t i = 1; i < 5000; ++i) REQUIRE(r[10000 - i] == doctest::Approx(r[10000 + i]).epsilon(1e-9));

  std::vector<double> short_x(100, 1.0);
  CHECK_THROWS_AS(filter_zero_phase(short_x, k.taps), LengthError);
}

TEST_CASE("average re-reference") {
  SampledSignal s;
  s.rate_hz = 1.0;
  s.channel_labels = {"a", "b"};
  s.samples = {{1, 1}, {3, 3}};
  const auto r = average_rereference(s);
  CHECK(r.samples[0] == std::vector<double>{-1, -1});
  CHECK(r.samples[1] == std::vector<double>{1, 1});
  CHECK_THROWS_AS(average_rereference(testing::constant_signal(1, 4, 1.0)), ParameterError);

  auto same = testing::constant_signal(3, 5, 1.0, 2.5);
  for (const auto& ch : average_rereference(same).samples) {
    for (double v : ch) CHECK(v == 0.0);
  }
}

TEST_CASE("re-reference and baseline correction are idempotent and commute") {
  SampledSignal s;
  s.rate_hz = 10.0;
  for (int c = 0; c < 4; ++c) {
    s.channel_labels.push_back("c" + std::to_string(c));
    s.samples.push_back(testing::white_noise(200, 10 + c));
    for (double& v : s.samples.back()) v += c;
  }
  auto close = [](const SampledSignal& a, const SampledSignal& b) {
    double w = 0.0;
    for (std::size_t c = 0; c < a.n_channels(); ++c) {
      for (std::size_t n = 0; n < a.n_samples(); ++n) w = std::max(w, std::abs(a.samples[c][n] - b.samples[c][n]));
    }
    return w;
  };
  const auto r = average_rereference(s);
  const auto b = baseline_correct(s);
  CHECK(close(average_rereference(r), r) < 1e-12);
  CHECK(close(baseline_correct(b), b) < 1e-12);
  CHECK(close(baseline_correct(r), average_rereference(b)) < 1e-12);
  for (std::size_t n = 0; n < r.n_samples(); ++n) {
    double m = 0.0;
    for (const auto& ch : r.samples) m += ch[n];
    REQUIRE(std::abs(m) < 1e-12);
  }
}

TEST_CASE("baseline correction") {
  const auto r = baseline_correct(testing::single({1, 2, 3}, 1.0));
  CHECK(r.samples[0] == std::vector<double>{-1, 0, 1});
  const auto z = baseline_correct(testing::single({-1, 0, 1}, 1.0));
  CHECK(z.samples[0] == std::vector<double>{-1, 0, 1});
  const auto c = baseline_correct(testing::single({4, 4, 4}, 1.0));
  CHECK(c.samples[0] == std::vector<double>{0, 0, 0});
}

TEST_CASE("db4 analysis-synthesis is perfect reconstruction") {
  const auto x = testing::white_noise(1024, 3);
  const auto d = dwt_forward(x, 4);
  const auto y = dwt_inverse(d);
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - y[i]));
  CHECK(e < 1e-10);
  CHECK(db4_lowpass().size() == 8);
}

TEST_CASE("wavelet denoising") {
  const auto x = testing::white_noise(1000, 4);
  const auto same = dwt_denoise(x, 4, 0.0);
  REQUIRE(same.size() == x.size());
  double e = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e = std::max(e, std::abs(x[i] - same[i]));
    norm = std::max(norm, std::abs(x[i]));
  }
  CHECK(e / norm < 1e-10);

  const auto zeros = dwt_denoise(std::vector<double>(512, 0.0), 4);
  for (double v : zeros) CHECK(v == 0.0);
  CHECK_THROWS_AS(dwt_denoise(std::vector<double>(8, 1.0), 4), LengthError);

  std::vector<double> beats;
  for (double t = 0.5; t < 30.0; t += 0.8) beats.push_back(t);
  const auto clean = synth_ecg_from_beats(beats, 130.0, 130 * 30);
  const auto noise = testing::white_noise(clean.size(), 5);
  std::vector<double> noisy(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) noisy[i] = clean[i] + 0.25 * noise[i];
  // Soft universal thresholding only pays off once noise dominates the sharp QRS detail.
  const auto den = dwt_denoise(noisy, 4);
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    before += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
    after += (den[i] - clean[i]) * (den[i] - clean[i]);
  }
  CHECK(after < before);
}

TEST_CASE("three-point velocity") {
  SampledSignal g;
  g.rate_hz = 100.0;
  g.channel_labels = {"x_deg", "y_deg"};
  std::vector<double> ramp(50);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  g.samples = {ramp, std::vector<double>(50, 3.0)};
  const auto v = three_point_velocity(g);
  CHECK(std::isnan(v.front()));
  CHECK(std::isnan(v.back()));
  for (std::size_t i = 1; i + 1 < v.size(); ++i) REQUIRE(v[i] == doctest::Approx(100.0));

  g.samples[0][10] = NAN;
  const auto w = three_point_velocity(g);
  CHECK(std::isnan(w[9]));
  CHECK(std::isnan(w[11]));
  CHECK_FALSE(std::isnan(w[12]));
}

TEST_CASE("I-VT labels") {
  SampledSignal g;
  g.rate_hz = 100.0;
  g.channel_labels = {"x_deg", "y_deg"};
  g.samples = {std::vector<double>(40, 1.0), std::vector<double>(40, 1.0)};
  auto still = ivt_classify(g);
  for (std::size_t i = 1; i + 1 < 40; ++i) REQUIRE(still.labels[i] == GazeLabel::fixation);
  CHECK(still.labels.front() == GazeLabel::gap);

  // A 10 deg step between samples 19 and 20 spans 2 sample periods: 500 deg/s.
  for (std::size_t i = 20; i < 40; ++i) g.samples[0][i] = 11.0;
  const auto jump = ivt_classify(g);
  CHECK(jump.velocity_dps[19] == doctest::Approx(500.0));
  CHECK(jump.velocity_dps[20] == doctest::Approx(500.0));
  CHECK(jump.labels[19] == GazeLabel::saccade);
  CHECK(jump.labels[20] == GazeLabel::saccade);
  CHECK(jump.labels[22] == GazeLabel::fixation);

  // Velocity equal to the threshold: 0.25 deg per sample is exactly 25 deg/s.
  std::vector<double> slow(10);
  for (std::size_t i = 0; i < slow.size(); ++i) slow[i] = 0.25 * static_cast<double>(i);
  g.samples = {slow, std::vector<double>(10, 0.0)};
  const auto tie = ivt_classify(g, 25.0);
  CHECK(tie.velocity_dps[5] == 25.0);
  CHECK(tie.labels[5] == GazeLabel::saccade);
}

TEST_CASE("I-VT labels ignore a translation of the gaze") {
  Rng rng(9);
  SampledSignal g;
  g.rate_hz = 100.0;
  g.channel_labels = {"x_deg", "y_deg"};
  std::vector<double> x(300), y(300);
  double px = 0, py = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.uniform() < 0.05) px += rng.uniform(-8, 8);
    x[i] = px + 0.05 * rng.normal();
    y[i] = py + 0.05 * rng.normal();
  }
  g.samples = {x, y};
  auto moved = g;
  for (double& v : moved.samples[0]) v += 7.25;
  for (double& v : moved.samples[1]) v -= 3.5;
  CHECK(ivt_classify(g).labels == ivt_classify(moved).labels);
}

TEST_CASE("median smoothing") {
  auto s = testing::single({1, 100, 1}, 100.0);
  CHECK(median_smooth_gaze(s).samples[0][1] == 1.0);
  auto mono = testing::single({1, 2, 3, 4, 5}, 100.0);
  CHECK(median_smooth_gaze(mono).samples[0] == mono.samples[0]);
  auto gap = testing::single({1, NAN, 1}, 100.0);
  CHECK(median_smooth_gaze(gap).samples[0][1] == 1.0);
  CHECK_THROWS_AS(median_smooth_gaze(s, 4), ParameterError);
}

TEST_CASE("constant interpolation of short gaps") {
  std::vector<double> x(30, 1.0);
  x[4] = 2.0;
  for (int i = 5; i < 10; ++i) x[i] = NAN; // 50 ms
  for (int i = 15; i < 23; ++i) x[i] = NAN; // 80 ms
  x[0] = NAN;
  const auto r = interpolate_gaps_constant(testing::single(x, 100.0));
  for (int i = 5; i < 10; ++i) CHECK(r.samples[0][i] == 2.0);
  for (int i = 15; i < 23; ++i) CHECK(std::isnan(r.samples[0][i]));
  CHECK(std::isnan(r.samples[0][0]));
}

TEST_CASE("pupil cleaning") {
  const auto flat = clean_pupil(testing::single(std::vector<double>(200, 3.0), 100.0));
  for (double v : flat.pupil.samples[0]) REQUIRE(v == 3.0);
  CHECK(flat.blink_candidates.empty());

  // A two-sample plateau survives median(3); both its edges exceed 1 mm/s.
  std::vector<double> step(200, 3.0);
  step[100] = step[101] = 3.5;
  const auto s = clean_pupil(testing::single(step, 100.0));
  CHECK_FALSE(s.artifact_samples.empty());
  for (double v : s.pupil.samples[0]) REQUIRE_FALSE(std::isnan(v));
  CHECK(s.pupil.samples[0][100] == doctest::Approx(3.0).epsilon(1e-6));

  std::vector<double> drop(300, 3.0);
  for (int i = 100; i < 125; ++i) drop[i] = NAN; // 250 ms
  const auto d = clean_pupil(testing::single(drop, 100.0));
  REQUIRE(d.blink_candidates.size() == 1);
  CHECK(d.blink_candidates[0].length >= 25);
  CHECK(std::isnan(d.pupil.samples[0][112]));
}

TEST_CASE("natural cubic spline reproduces a line") {
  std::vector<double> xs{0, 1, 2, 3}, ys{1, 3, 5, 7}, q{0.5, 2.5};
  const auto r = natural_cubic_spline(xs, ys, q);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == doctest::Approx(6.0));
}
