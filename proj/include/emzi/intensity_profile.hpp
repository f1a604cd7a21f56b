#pragma once

#include <cstddef>
#include <vector>

namespace emzi {

/// Non-negative flux density sampled on a uniform grid.
struct IntensityProfile {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t k) const noexcept { return x_min + static_cast<double>(k) * dx; }
  double x_max() const noexcept { return x(values.size() - 1); }

  /// Integral of the piecewise-linear interpolant over [a, b] (trapezoidal rule with
  /// exact partial cells at the ends). Throws DomainError if [a, b] leaves the grid.
  double integrate(double a, double b) const;

  /// Integral over the whole grid.
  double total() const;

  /// Linear interpolation at x (0 outside the grid).
  double at(double x) const;

  /// Sub-profile covering [a, b] (inclusive of the bracketing samples).
  IntensityProfile cropped(double a, double b) const;
};

}  // namespace emzi
