#include "errsense/error.hpp"
#include "errsense/features.hpp"
#include "errsense/fft.hpp"
#include "errsense/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace errsense {

std::vector<double> hann_periodogram(std::span<const double> x, double rate_hz) {
  const std::size_t n = x.size();
  std::vector<double> tapered(n);
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Periodic Hann, the usual choice for spectral estimation.
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    tapered[i] = x[i] * w;
    w2 += w * w;
  }
  const auto spectrum = fft::real_forward(tapered);
  std::vector<double> psd(spectrum.size());
  const double scale = 1.0 / (rate_hz * w2);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    psd[k] = (unpaired ? 1.0 : 2.0) * std::norm(spectrum[k]) * scale;
  }
  return psd;
}

BandPowers psd_band_powers(std::span<const double> x, double rate_hz) {
  if (static_cast<double>(x.size()) < std::round(rate_hz)) {
    throw LengthError("band powers need at least one second of data");
  }
  const auto psd = hann_periodogram(x, rate_hz);
  const double df = rate_hz / static_cast<double>(x.size());
  std::array<double, 5> p{};
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    for (std::size_t b = 0; b < kEegBands.size(); ++b) {
      if (f >= kEegBands[b][0] && f < kEegBands[b][1]) {
        p[b] += psd[k] * df;
      }
    }
  }
  return {p[0], p[1], p[2], p[3], p[4]};
}

Moments stat_moments(std::span<const double> x) {
  Moments m;
  if (x.empty()) {
    return m;
  }
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

Morphology morphological(std::span<const double> x) {
  Morphology out;
  for (std::size_t i = 1; i < x.size(); ++i) {
    out.curve_length += std::abs(x[i] - x[i - 1]);
  }
  if (x.size() < 3) {
    return out;
  }
  double teager = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] > x[i + 1]) out.peak_count += 1.0;
    teager += x[i] * x[i] - x[i - 1] * x[i + 1];
  }
  out.nonlinear_energy = teager / static_cast<double>(x.size() - 2);
  return out;
}

std::vector<double> wavelet_energies(std::span<const double> x, std::size_t levels) {
  const std::size_t block = std::size_t{1} << levels;
  if (levels == 0 || x.size() < block) {
    throw LengthError("wavelet energies need at least " + std::to_string(block) + " samples");
  }
  std::vector<double> padded(x.begin(), x.end());
  padded.resize((x.size() + block - 1) / block * block, 0.0);
  const auto d = dwt_forward(padded, levels);
  std::vector<double> energies;
  auto energy = [](const std::vector<double>& c) {
    double e = 0.0;
    for (double v : c) e += v * v;
    return e;
  };
  for (const auto& level : d.details) energies.push_back(energy(level));
  energies.push_back(energy(d.approximation));
  return energies;
}

std::array<double, 2> ar_coefficients(std::span<const double> x) {
  if (x.size() < 16) {
    throw LengthError("AR estimation needs at least 16 samples");
  }
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  std::array<double, 3> r{};
  for (std::size_t lag = 0; lag < r.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t i = lag; i < x.size(); ++i) acc += (x[i] - mean) * (x[i - lag] - mean);
    r[lag] = acc / n;
  }
  if (!(r[0] > 0.0)) {
    throw DegenerateInputError("AR estimation on a constant window");
  }
  // Levinson-Durbin, order 1 then 2.
  const double k1 = r[1] / r[0];
  const double err1 = r[0] * (1.0 - k1 * k1);
  if (!(err1 > 0.0)) {
    throw DegenerateInputError("AR estimation on a perfectly predictable window");
  }
  const double k2 = (r[2] - k1 * r[1]) / err1;
  return {k1 - k2 * k1, k2};
}

double approximate_entropy(std::span<const double> x, std::size_t m, double r_factor) {
  const std::size_t n = x.size();
  if (n < m + 2) {
    throw LengthError("approximate entropy needs more than m + 1 samples");
  }
  const Moments mo = stat_moments(x);
  const double r = r_factor * std::sqrt(mo.variance);
  const std::size_t n_m = n - m + 1;  // templates of length m
  const std::size_t n_m1 = n - m;     // templates of length m + 1
  std::vector<std::size_t> count_m(n_m, 0);
  std::vector<std::size_t> count_m1(n_m1, 0);
  // Each unordered pair is visited once; both templates share the prefix test.
  for (std::size_t i = 0; i < n_m; ++i) {
    for (std::size_t j = i; j < n_m; ++j) {
      bool match = true;
      for (std::size_t k = 0; k < m; ++k) {
        if (std::abs(x[i + k] - x[j + k]) > r) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      ++count_m[i];
      if (j != i) ++count_m[j];
      if (j < n_m1 && std::abs(x[i + m] - x[j + m]) <= r) {
        ++count_m1[i];
        if (j != i) ++count_m1[j];
      }
    }
  }
  double phi_m = 0.0;
  for (std::size_t c : count_m) phi_m += std::log(static_cast<double>(c) / static_cast<double>(n_m));
  phi_m /= static_cast<double>(n_m);
  double phi_m1 = 0.0;
  for (std::size_t c : count_m1) phi_m1 += std::log(static_cast<double>(c) / static_cast<double>(n_m1));
  phi_m1 /= static_cast<double>(n_m1);
  return phi_m - phi_m1;
}

HurstEstimate hurst_exponent(std::span<const double> x) {
  if (x.size() < 128) {
    throw LengthError("Hurst exponent needs at least 128 samples");
  }
  static constexpr std::size_t kSizes[] = {8, 16, 32, 64};
  std::vector<double> log_size;
  std::vector<double> log_rs;
  for (std::size_t size : kSizes) {
    const std::size_t chunks = x.size() / size;
    double rs_sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      const auto chunk = x.subspan(c * size, size);
      double mean = 0.0;
      for (double v : chunk) mean += v;
      mean /= static_cast<double>(size);
      double cum = 0.0, lo = 0.0, hi = 0.0, ss = 0.0;
      for (double v : chunk) {
        const double d = v - mean;
        cum += d;
        lo = std::min(lo, cum);
        hi = std::max(hi, cum);
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(size));
      if (sd > 0.0) {
        rs_sum += (hi - lo) / sd;
        ++valid;
      }
    }
    if (valid > 0 && rs_sum > 0.0) {
      log_size.push_back(std::log(static_cast<double>(size)));
      log_rs.push_back(std::log(rs_sum / static_cast<double>(valid)));
    }
  }
  if (log_size.size() < 2) {
    throw DegenerateInputError("Hurst exponent: every chunk has zero variance");
  }
  const double k = static_cast<double>(log_size.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < log_size.size(); ++i) {
    sx += log_size[i];
    sy += log_rs[i];
    sxx += log_size[i] * log_size[i];
    sxy += log_size[i] * log_rs[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  HurstEstimate h{std::clamp(slope, 0.0, 1.5), false};
  h.clamped = h.value != slope;
  return h;
}

} // namespace errsense
