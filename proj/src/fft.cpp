#include "errsense/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace errsense::fft {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) {
      fftw_destroy_plan(plan);
    }
  }

  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard lock(mutex);
    auto it = plans.find({n, forward});
    if (it != plans.end()) {
      return it->second;
    }
    std::vector<double> real(n);
    std::vector<std::complex<double>> cplx(n / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = forward ? fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c, flags)
                          : fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(), flags | FFTW_DESTROY_INPUT);
    plans.emplace(std::make_pair(n, forward), p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

} // namespace

std::vector<std::complex<double>> real_forward(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  if (n == 0) {
    return out;
  }
  std::vector<double> in(x.begin(), x.end());
  fftw_execute_dft_r2c(cache().get(n, true), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> real_inverse(std::span<const std::complex<double>> spectrum, std::size_t n) {
  std::vector<double> out(n);
  if (n == 0) {
    return out;
  }
  // c2r overwrites its input.
  std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
  in.resize(n / 2 + 1);
  fftw_execute_dft_c2r(cache().get(n, false), reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) {
    v *= scale;
  }
  return out;
}

std::size_t good_size(std::size_t n) {
  if (n <= 1) {
    return 1;
  }
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) {
      return m;
    }
  }
}

} // namespace errsense::fft
