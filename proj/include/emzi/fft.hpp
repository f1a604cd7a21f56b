#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace emzi {

/// In-place complex DFT of fixed length backed by FFTW. Plans are created once per
/// length (the FFTW planner is not thread-safe, so creation is serialized) and
/// executed with the new-array interface, which is safe from any thread.
/// inverse() is unnormalized.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace emzi
