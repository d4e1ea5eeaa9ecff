#include "errsense/error.hpp"
#include "errsense/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace errsense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// keep_missing leaves NaN centres missing instead of filling them from
// their neighbours.
std::vector<double> running_median(std::span<const double> x, std::size_t kernel, bool keep_missing = false) {
  if (kernel % 2 == 0 || kernel == 0) {
    throw ParameterError("median kernel must be odd, got " + std::to_string(kernel));
  }
  const std::size_t half = kernel / 2;
  std::vector<double> out(x.begin(), x.end());
  if (x.size() < kernel) {
    return out;
  }
  std::vector<double> window;
  window.reserve(kernel);
  for (std::size_t i = half; i + half < x.size(); ++i) {
    if (keep_missing && std::isnan(x[i])) continue;
    window.clear();
    for (std::size_t j = i - half; j <= i + half; ++j) {
      if (!std::isnan(x[j])) window.push_back(x[j]);
    }
    if (window.empty()) {
      out[i] = kNaN;
      continue;
    }
    std::sort(window.begin(), window.end());
    const std::size_t m = window.size() / 2;
    out[i] = window.size() % 2 == 1 ? window[m] : 0.5 * (window[m - 1] + window[m]);
  }
  return out;
}

std::size_t velocity_half_width(double rate_hz, double window_ms) {
  const auto k = static_cast<std::size_t>(std::llround(window_ms / 1000.0 * rate_hz / 2.0));
  return std::max<std::size_t>(k, 1);
}

} // namespace

std::vector<Gap> find_gaps(std::span<const double> x) {
  std::vector<Gap> gaps;
  std::size_t i = 0;
  while (i < x.size()) {
    if (!std::isnan(x[i])) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    while (i < x.size() && std::isnan(x[i])) ++i;
    gaps.push_back({first, i - first});
  }
  return gaps;
}

std::vector<double> three_point_velocity(const SampledSignal& gaze, double window_ms) {
  if (gaze.n_channels() < 2) {
    throw ParameterError("gaze velocity needs x and y channels");
  }
  const std::size_t n = gaze.n_samples();
  const std::size_t k = velocity_half_width(gaze.rate_hz, window_ms);
  const double per_distance = gaze.rate_hz / (2.0 * static_cast<double>(k));
  const auto& gx = gaze.samples[0];
  const auto& gy = gaze.samples[1];
  std::vector<double> v(n, kNaN);
  for (std::size_t i = k; i + k < n; ++i) {
    const double dx = gx[i + k] - gx[i - k];
    const double dy = gy[i + k] - gy[i - k];
    // NaN neighbours propagate to an undefined velocity.
    v[i] = std::hypot(dx, dy) * per_distance;
  }
  return v;
}

GazeLabelTrace ivt_classify(const SampledSignal& gaze, double velocity_threshold_dps, double window_ms) {
  GazeLabelTrace trace;
  trace.velocity_dps = three_point_velocity(gaze, window_ms);
  trace.labels.reserve(trace.velocity_dps.size());
  for (double v : trace.velocity_dps) {
    if (std::isnan(v)) {
      trace.labels.push_back(GazeLabel::gap);
    } else {
      trace.labels.push_back(v >= velocity_threshold_dps ? GazeLabel::saccade : GazeLabel::fixation);
    }
  }
  return trace;
}

SampledSignal median_smooth_gaze(const SampledSignal& gaze, std::size_t kernel) {
  if (kernel % 2 == 0) {
    throw ParameterError("median kernel must be odd, got " + std::to_string(kernel));
  }
  SampledSignal out = gaze;
  for (auto& ch : out.samples) {
    ch = running_median(ch, kernel);
  }
  return out;
}

SampledSignal interpolate_gaps_constant(const SampledSignal& gaze, double max_gap_ms) {
  SampledSignal out = gaze;
  for (auto& ch : out.samples) {
    for (const Gap& g : find_gaps(ch)) {
      const bool has_left = g.first > 0;
      const bool has_right = g.first + g.length < ch.size();
      const double gap_ms = static_cast<double>(g.length) / gaze.rate_hz * 1000.0;
      if (has_left && has_right && gap_ms < max_gap_ms) {
        std::fill_n(ch.begin() + static_cast<std::ptrdiff_t>(g.first), g.length, ch[g.first - 1]);
      }
    }
  }
  return out;
}

std::vector<double> natural_cubic_spline(std::span<const double> xs, std::span<const double> ys,
                                         std::span<const double> query) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) {
    throw ParameterError("spline needs at least two knots");
  }
  // Second derivatives by the Thomas algorithm; natural ends M0 = Mn-1 = 0.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    std::vector<double> diag(n), upper(n), rhs(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = xs[i] - xs[i - 1];
      const double h1 = xs[i + 1] - xs[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = xs[i] - xs[i - 1];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = (rhs[i] - (i + 2 < n ? upper[i] * m[i + 1] : 0.0)) / diag[i];
    }
  }
  std::vector<double> out;
  out.reserve(query.size());
  for (double q : query) {
    auto it = std::upper_bound(xs.begin(), xs.end(), q);
    std::size_t j = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    j = std::min(j, n - 2);
    const double h = xs[j + 1] - xs[j];
    const double a = (xs[j + 1] - q) / h;
    const double b = (q - xs[j]) / h;
    out.push_back(a * ys[j] + b * ys[j + 1] + ((a * a * a - a) * m[j] + (b * b * b - b) * m[j + 1]) * h * h / 6.0);
  }
  return out;
}

PupilCleanResult clean_pupil(const SampledSignal& pupil, const PupilCleanOptions& options) {
  if (pupil.n_channels() != 1) {
    throw ParameterError("pupil stream must have a single channel");
  }
  PupilCleanResult result;
  result.pupil = pupil;
  auto& x = result.pupil.samples[0];
  x = running_median(x, options.first_median, true);

  const double max_step = options.max_rate_mm_per_s / pupil.rate_hz;
  std::vector<double> marked = x;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!std::isnan(x[i]) && !std::isnan(x[i - 1]) && std::abs(x[i] - x[i - 1]) > max_step) {
      marked[i] = kNaN;
      result.artifact_samples.push_back(i);
    }
  }
  x = running_median(marked, options.second_median, true);

  std::vector<double> knots_x;
  std::vector<double> knots_y;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isnan(x[i])) {
      knots_x.push_back(static_cast<double>(i));
      knots_y.push_back(x[i]);
    }
  }
  std::vector<double> fill_at;
  for (const Gap& g : find_gaps(x)) {
    const bool interior = g.first > 0 && g.first + g.length < x.size();
    const double gap_ms = static_cast<double>(g.length) / pupil.rate_hz * 1000.0;
    if (interior && gap_ms < options.max_spline_gap_ms && knots_x.size() >= 2) {
      for (std::size_t i = 0; i < g.length; ++i) fill_at.push_back(static_cast<double>(g.first + i));
    }
  }
  if (!fill_at.empty()) {
    const auto filled = natural_cubic_spline(knots_x, knots_y, fill_at);
    for (std::size_t i = 0; i < fill_at.size(); ++i) {
      x[static_cast<std::size_t>(fill_at[i])] = filled[i];
    }
  }
  result.blink_candidates = find_gaps(x);
  return result;
}

} // namespace errsense
