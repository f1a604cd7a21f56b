#include "emzi/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace emzi {

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// Plans live for the whole process; FFTW owns their storage.
std::pair<fftw_plan, fftw_plan> plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    auto* buf = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    // FFTW_ESTIMATE keeps plan choice (and so rounding) independent of timing noise;
    // FFTW_UNALIGNED lets std::vector storage be used directly.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p{fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags),
               fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, flags)};
    fftw_free(buf);
    if (!p.forward || !p.inverse) throw std::runtime_error("FFTW planning failed");
    it = cache.emplace(n, p).first;
  }
  return {it->second.forward, it->second.inverse};
}

void run(void* plan, std::span<std::complex<double>> data, std::size_t n) {
  if (data.size() != n) throw std::invalid_argument("Fft: buffer length does not match plan");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan), p, p);
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft: zero length");
  auto [f, i] = plans_for(n);
  forward_plan_ = f;
  inverse_plan_ = i;
}

void Fft::forward(std::span<std::complex<double>> data) const { run(forward_plan_, data, n_); }
void Fft::inverse(std::span<std::complex<double>> data) const { run(inverse_plan_, data, n_); }

}  // namespace emzi
