#include "errsense/wavelet.hpp"

#include "errsense/error.hpp"

#include <array>
#include <string>

namespace errsense {

namespace {

constexpr std::array<double, 8> kDb4 = {
    0.23037781330885523,  0.71484657055254153, 0.63088076792959036,  -0.027983769416983849,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278,
};

constexpr std::size_t kTaps = kDb4.size();

// Quadrature mirror highpass g[k] = (-1)^k h[L-1-k].
constexpr std::array<double, kTaps> make_highpass() {
  std::array<double, kTaps> g{};
  for (std::size_t k = 0; k < kTaps; ++k) {
    g[k] = ((k % 2 == 0) ? 1.0 : -1.0) * kDb4[kTaps - 1 - k];
  }
  return g;
}

constexpr std::array<double, kTaps> kHigh = make_highpass();

// a[i] = sum_k h[k] x[(2i + k) mod n]
void analysis_step(std::span<const double> x, std::vector<double>& approx, std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < kTaps; ++k) {
      const double v = x[(2 * i + k) % n];
      a += kDb4[k] * v;
      d += kHigh[k] * v;
    }
    approx[i] = a;
    detail[i] = d;
  }
}

// Adjoint of analysis_step; exact inverse because the filter bank is orthogonal.
std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail) {
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t k = 0; k < kTaps; ++k) {
      x[(2 * i + k) % n] += kDb4[k] * approx[i] + kHigh[k] * detail[i];
    }
  }
  return x;
}

} // namespace

std::span<const double> db4_lowpass() { return kDb4; }

WaveletDecomposition dwt_forward(std::span<const double> x, std::size_t levels) {
  const std::size_t block = std::size_t{1} << levels;
  if (levels == 0 || x.size() < block || x.size() % block != 0) {
    throw LengthError("DWT of " + std::to_string(levels) + " levels needs a length that is a positive multiple of " +
                      std::to_string(block) + ", got " + std::to_string(x.size()));
  }
  WaveletDecomposition d;
  d.length = x.size();
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t level = 0; level < levels; ++level) {
    std::vector<double> approx;
    std::vector<double> detail;
    analysis_step(current, approx, detail);
    d.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  d.approximation = std::move(current);
  return d;
}

std::vector<double> dwt_inverse(const WaveletDecomposition& d) {
  std::vector<double> current = d.approximation;
  for (std::size_t level = d.details.size(); level-- > 0;) {
    current = synthesis_step(current, d.details[level]);
  }
  return current;
}

} // namespace errsense
