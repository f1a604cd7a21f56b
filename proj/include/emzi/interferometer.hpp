#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "emzi/beamline.hpp"
#include "emzi/fringe.hpp"
#include "emzi/intensity_profile.hpp"
#include "emzi/propagation.hpp"

namespace emzi {

/// Partial coherence model: incoherent emitters spread uniformly over the source slit
/// (midpoint rule) and optional Gaussian-weighted energy samples over +-3 sigma.
struct CoherenceSpec {
  std::size_t n_source_points = 32;
  std::size_t n_energy_samples = 1;
  double convergence_tol = 1e-3;
  std::size_t max_source_points = 64;

  void validate() const;
};

struct IncoherentSample {
  double source_x = 0.0;
  double wavelength = 0.0;
  double weight = 0.0;
};

/// Emitters in the fixed summation order (energy-major, source position ascending).
/// Weights sum to one.
std::vector<IncoherentSample> incoherent_samples(const GeometrySpec& geometry, const CoherenceSpec& coherence);

/// Paraxial point-source wave exp(i pi (x - source_x)^2 / (lambda D)) truncated by the
/// collimator slit and normalized to unit probability.
WaveField collimator_exit_field(const GeometrySpec& geometry, double source_x, double wavelength,
                                const SamplingPlan& plan);

/// |psi|^2 on the full detector grid for one coherent emitter, per unit probability
/// leaving the collimator.
IntensityProfile propagate_point_source(const GeometrySpec& geometry, double source_x, double wavelength,
                                        const SamplingPlan& plan);

/// Incoherent sum over emitters, normalized to unit total over the grid.
IntensityProfile detector_pattern(const GeometrySpec& geometry, const CoherenceSpec& coherence,
                                  const SamplingPlan& plan);
IntensityProfile detector_pattern(const GeometrySpec& geometry, const CoherenceSpec& coherence);

/// Trapezoidal integral of the profile over the slit opening.
double detector_flux(const IntensityProfile& profile, const ApertureSpec& slit);

/// Detector-plane patterns (absolute flux density per unit collimator transmission)
/// for each middle-grating shift, cropped to +-crop_half_width. The upstream field
/// at the middle grating is computed once per emitter; shifts are evaluated in
/// parallel and each sums its emitters in the fixed order.
struct ScanPatterns {
  std::vector<double> shifts;
  std::vector<IntensityProfile> patterns;
};
ScanPatterns middle_grating_patterns(const GeometrySpec& geometry, const CoherenceSpec& coherence,
                                     std::span<const double> shifts, const SamplingPlan& plan,
                                     double crop_half_width);

FringeScan scan_middle_grating(const GeometrySpec& geometry, const CoherenceSpec& coherence,
                               std::span<const double> shifts, const ApertureSpec& detector_slit,
                               const SamplingPlan& plan);

struct CoherenceConvergence {
  CoherenceSpec coherence;                    ///< the accepted source-point count
  std::vector<std::size_t> counts;            ///< counts evaluated, in order
  std::vector<double> max_relative_change;    ///< change vs the previous count (first entry 0)
  bool converged = false;
};

/// Doubles n_source_points until every slit flux changes by less than
/// convergence_tol relative to the largest flux, or max_source_points is reached.
CoherenceConvergence converge_source_points(const GeometrySpec& geometry, const CoherenceSpec& coherence,
                                            std::span<const ApertureSpec> slits, const SamplingPlan& plan);

}  // namespace emzi
