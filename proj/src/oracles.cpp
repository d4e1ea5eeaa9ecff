#include "errsense/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace errsense::oracle {

namespace {
constexpr double kPi = std::numbers::pi;
}

BandPowers dft_band_powers(std::span<const double> x, double rate_hz) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::pow(std::sin(kPi * static_cast<double>(i) / static_cast<double>(n)), 2);
    w2 += w[i] * w[i];
  }
  const double df = rate_hz / static_cast<double>(n);
  double p[5] = {0, 0, 0, 0, 0};
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    int band = -1;
    for (int b = 0; b < 5; ++b) {
      if (f >= kEegBands[b][0] && f < kEegBands[b][1]) band = b;
    }
    if (band < 0) continue;
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = -2.0 * kPi * static_cast<double>((k * i) % n) / static_cast<double>(n);
      re += x[i] * w[i] * std::cos(ang);
      im += x[i] * w[i] * std::sin(ang);
    }
    const bool single = k == 0 || 2 * k == n;
    const double power = static_cast<double>(re * re + im * im) / (rate_hz * w2);
    p[band] += (single ? 1.0 : 2.0) * power * df;
  }
  return {p[0], p[1], p[2], p[3], p[4]};
}

double naive_apen(std::span<const double> x, std::size_t m, double r_factor) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double r = r_factor * std::sqrt(var / static_cast<double>(n));

  auto phi = [&](std::size_t len) {
    const std::size_t count = n - len + 1;
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < count; ++j) {
        double dist = 0.0;
        for (std::size_t k = 0; k < len; ++k) dist = std::max(dist, std::abs(x[i + k] - x[j + k]));
        if (dist <= r) ++c;
      }
      sum += std::log(static_cast<double>(c) / static_cast<double>(count));
    }
    return sum / static_cast<double>(count);
  };
  return phi(m) - phi(m + 1);
}

double dtft_gain_db(std::span<const double> taps, double f_hz, double rate_hz) {
  long double re = 0.0L, im = 0.0L;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double ang = 2.0 * kPi * f_hz / rate_hz * static_cast<double>(k);
    re += taps[k] * std::cos(ang);
    im -= taps[k] * std::sin(ang);
  }
  const double mag = std::sqrt(static_cast<double>(re * re + im * im));
  return 20.0 * std::log10(std::max(mag, 1e-300));
}

FilterResponse probe_filter(const FirKernel& kernel, std::size_t n) {
  const FirDesign& d = kernel.design;
  const double nyq = d.rate_hz / 2.0;
  FilterResponse r;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = nyq * static_cast<double>(i) / static_cast<double>(n - 1);
    const bool pass = f >= d.low_hz + d.transition_low_hz / 2.0 && f <= d.high_hz - d.transition_high_hz / 2.0;
    const bool stop = f <= d.low_hz - d.transition_low_hz / 2.0 || f >= d.high_hz + d.transition_high_hz / 2.0;
    if (!pass && !stop) continue;
    ++r.probes;
    const double g = dtft_gain_db(kernel.taps, f, d.rate_hz);
    if (pass) r.max_passband_deviation_db = std::max(r.max_passband_deviation_db, std::abs(g));
    else r.max_stopband_gain_db = std::max(r.max_stopband_gain_db, g);
  }
  return r;
}

int zero_phase_lag(std::span<const double> taps, double f_hz, double rate_hz, std::size_t n, int max_lag) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * f_hz * static_cast<double>(i) / rate_hz);
  const auto y = filter_zero_phase(x, taps);
  const std::size_t lo = n / 4;
  const std::size_t hi = 3 * n / 4;
  int best = 0;
  double best_c = -1e300;
  for (int step = 0; step <= 2 * max_lag; ++step) {
    const int lag = step % 2 ? (step + 1) / 2 : -step / 2; // 0, 1, -1, 2, -2, ...
    double c = 0.0;
    for (std::size_t i = lo; i < hi; ++i) c += x[i] * y[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  return best;
}

double t_two_sided_p(double t, double df) {
  const double a = std::abs(t);
  const double logc = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * kPi);
  auto density = [&](double u) { return std::exp(logc - (df + 1.0) / 2.0 * std::log1p(u * u / df)); };
  // Substitute u = a + s / (1 - s) to map [a, inf) onto [0, 1).
  auto integrand = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double u = a + s / (1.0 - s);
    return density(u) / ((1.0 - s) * (1.0 - s));
  };
  const std::size_t steps = 200000;
  const double h = 1.0 / static_cast<double>(steps);
  double sum = integrand(0.0) + integrand(1.0);
  for (std::size_t i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(static_cast<double>(i) * h);
  return 2.0 * sum * h / 3.0;
}

double mlp_gradient_error(MlpModel m, const Matrix& Xs, const Labels& y, double l2, double h) {
  const MlpGradient g = mlp_loss_and_gradient(m, Xs, y, l2);
  double worst = 0.0;
  auto compare = [&](double analytic, double& param) {
    const double keep = param;
    param = keep + h;
    const double up = mlp_loss(m, Xs, y, l2);
    param = keep - h;
    const double down = mlp_loss(m, Xs, y, l2);
    param = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(analytic - numeric) / std::max(1e-7, std::abs(analytic) + std::abs(numeric));
    worst = std::max(worst, rel);
  };
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (Eigen::Index r = 0; r < m.layers[l].W.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.layers[l].W.cols(); ++c) compare(g.grad[l].W(r, c), m.layers[l].W(r, c));
    }
    for (Eigen::Index r = 0; r < m.layers[l].b.size(); ++r) compare(g.grad[l].b(r), m.layers[l].b(r));
  }
  return worst;
}

} // namespace errsense::oracle
