#pragma once

#include <cstddef>
#include <vector>

#include "emzi/beamline.hpp"
#include "emzi/intensity_profile.hpp"

namespace emzi {

/// Plane-wave near-field intensity behind a single grating on a periodic grid
/// spanning n_periods periods.
struct TalbotCarpet {
  double period = 0.0;
  double wavelength = 0.0;
  double talbot_length = 0.0;          ///< d^2 / lambda
  std::vector<double> z;               ///< slice distances, ascending, in (0, z_max]
  std::vector<IntensityProfile> slices;
  IntensityProfile grating_intensity;  ///< |t(x)|^2 on the same grid
};

TalbotCarpet talbot_carpet(const GratingSpec& grating, double wavelength, double z_max, std::size_t n_planes,
                           std::size_t samples_per_period = 64, std::size_t n_periods = 4);

/// Single slice at distance z (same grid conventions as talbot_carpet).
IntensityProfile talbot_slice(const GratingSpec& grating, double wavelength, double z,
                              std::size_t samples_per_period = 64, std::size_t n_periods = 4);

/// Pearson correlation between a(x) and b(x - shift) on a periodic grid; the shift is
/// rounded to the nearest whole sample.
double periodic_correlation(const IntensityProfile& a, const IntensityProfile& b, double shift = 0.0);

/// Strongest non-constant spatial period of a periodic profile.
double dominant_period(const IntensityProfile& profile);

/// (max - min) / (max + min) of a profile.
double pattern_contrast(const IntensityProfile& profile);

/// How a grating spacing relates to the self-imaging length.
struct TalbotReport {
  double talbot_length = 0.0;
  double spacing = 0.0;
  double ratio = 0.0;          ///< spacing / talbot_length
  long nearest_multiple = 0;
  double mismatch = 0.0;       ///< |ratio - nearest_multiple|
};

TalbotReport talbot_report(double grating_period, double wavelength, double spacing);

}  // namespace emzi
