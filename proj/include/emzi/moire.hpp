#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emzi/beamline.hpp"
#include "emzi/fringe.hpp"

namespace emzi {

/// Straight-ray sampling of the two collimation slits. A ray is the line through
/// (x_s, z_source) and (x_c, z_collimator).
struct RayBundleSpec {
  enum class Quadrature { deterministic_grid, monte_carlo };

  std::size_t n_source_samples = 501;
  std::size_t n_collimator_samples = 501;
  Quadrature quadrature = Quadrature::deterministic_grid;
  std::uint64_t seed = 1;
  std::size_t n_rays = 250000;  ///< Monte Carlo only

  void validate() const;
};

/// Classical flux through the beamline (fraction of rays crossing both collimation
/// slits that also clear every inserted grating and land in the detector slit).
/// Deterministic mode uses 2D trapezoid weights on the (x_s, x_c) grid.
double moire_flux(const GeometrySpec& geometry, const RayBundleSpec& bundle, const ApertureSpec& detector_slit);

struct MoireEstimate {
  double flux = 0.0;
  double standard_error = 0.0;  ///< zero for the deterministic grid
};
MoireEstimate moire_flux_estimate(const GeometrySpec& geometry, const RayBundleSpec& bundle,
                                  const ApertureSpec& detector_slit);

/// Middle-grating scan with the classical engine.
FringeScan moire_scan(const GeometrySpec& geometry, const RayBundleSpec& bundle, std::span<const double> shifts,
                      const ApertureSpec& detector_slit);

/// Classical fluxes for every (shift, detector-slit center) pair, computed from one
/// ray set. Result is indexed [shift][position].
std::vector<std::vector<double>> moire_flux_table(const GeometrySpec& geometry, const RayBundleSpec& bundle,
                                                  std::span<const double> shifts,
                                                  std::span<const double> detector_centers, double slit_width);

}  // namespace emzi
