#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace emzi {

using Complex = std::complex<double>;

/// Sampled transverse amplitude on a uniform grid. Sample k sits at the center of
/// the cell [x_min + (k - 1/2) dx, x_min + (k + 1/2) dx).
struct WaveField {
  std::vector<Complex> samples;
  double x_min = 0.0;
  double dx = 1.0;
  double wavelength = 1.0;

  std::size_t size() const noexcept { return samples.size(); }
  double x(std::size_t k) const noexcept { return x_min + static_cast<double>(k) * dx; }
  double x_max() const noexcept { return x(size() - 1); }

  /// Integral of |psi|^2 dx (rectangle rule on the cell grid).
  double total_probability() const;
};

/// Zero field on an axis-symmetric cell-centered grid: x_k = (k - n/2 + 1/2) dx.
/// Mask edges placed at integer multiples of dx never coincide with a sample.
WaveField make_centered_field(std::size_t n, double dx, double wavelength);

/// Relative L2 distance ||a - b|| / ||b||.
double relative_l2(const std::vector<Complex>& a, const std::vector<Complex>& b);
double relative_l2(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace emzi
