#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emzi/beamline.hpp"
#include "emzi/wave_field.hpp"

namespace emzi {

enum class EdgeTreatment {
  periodic,   ///< plain circular propagation on the grid
  absorbing,  ///< cosine taper over the outer 5% of the window before propagating
};

inline constexpr double kTaperFraction = 0.05;

/// Multiplies the outer `fraction` of the window (each side) by a cos^2 ramp to zero.
void apply_edge_taper(WaveField& field, double fraction = kTaperFraction);

/// Paraxial Fresnel transfer function exp(-i pi lambda L f^2) on a fixed grid,
/// precomputed once and applied by FFT convolution. The global phase exp(i k L)
/// is dropped.
class FresnelPropagator {
 public:
  FresnelPropagator(std::size_t n, double dx, double wavelength, double distance,
                    EdgeTreatment edges = EdgeTreatment::absorbing);

  void apply(std::span<Complex> samples) const;

  std::size_t size() const noexcept { return transfer_.size(); }
  double distance() const noexcept { return distance_; }
  double wavelength() const noexcept { return wavelength_; }

 private:
  std::vector<Complex> transfer_;
  std::vector<double> taper_;
  double distance_;
  double wavelength_;
};

/// Spectral (transfer-function) Fresnel propagation over `distance` > 0.
WaveField fresnel_propagate(const WaveField& field, double distance, EdgeTreatment edges = EdgeTreatment::absorbing);

/// O(N^2) direct quadrature of the Fresnel kernel (i lambda L)^(-1/2) exp(i pi (x'-x)^2 / (lambda L))
/// on the same grid, without periodic wrap. Oracle for the spectral method.
WaveField fresnel_propagate_direct(const WaveField& field, double distance);

/// Binary transmission of an element sampled at the field's grid points.
std::vector<double> transmission(const GratingSpec& grating, const WaveField& field);
std::vector<double> transmission(const ApertureSpec& aperture, const WaveField& field);

WaveField apply_mask(WaveField field, const GratingSpec& grating);
WaveField apply_mask(WaveField field, const ApertureSpec& aperture);

/// Sampling certificate for one plane-to-plane propagation leg.
///
/// Two conditions are checked. Nyquist: the quadratic phase connecting any point of
/// the origin support to any point of the target region must be resolved,
/// dx <= lambda_min L / (2 X) with X = origin_half_width + target_half_width.
/// Wrap: content leaving the origin at the steepest representable angle
/// (reach lambda_max L / (2 dx)) must not re-enter the target region through the
/// periodic boundary, and the target region must stay clear of the taper band.
struct LegSampling {
  std::string name;
  double distance = 0.0;
  double wavelength_min = 0.0;
  double wavelength_max = 0.0;
  double origin_half_width = 0.0;
  double target_half_width = 0.0;
  double nyquist_dx = 0.0;
  double max_reach = 0.0;
  double wrap_budget = 0.0;
  bool nyquist_ok = false;
  bool wrap_ok = false;

  bool certified() const noexcept { return nyquist_ok && wrap_ok; }
};

struct SamplingOptions {
  double max_dx = 5e-9;
  double min_samples_per_period = 20.0;
  std::optional<double> dx;               ///< force the grid spacing
  std::optional<std::size_t> n_samples;   ///< force the grid length
  double min_detector_half_width = 120e-6;
  std::size_t min_samples = 1024;
  std::size_t max_samples = std::size_t{1} << 22;
};

/// Fixed grid shared by every plane of the beamline, with per-leg certificates.
struct SamplingPlan {
  double dx = 0.0;
  std::size_t n_samples = 0;
  double detector_half_width = 0.0;
  bool resolves_grating = false;  ///< at least min_samples_per_period samples per grating period
  std::vector<LegSampling> legs;  ///< collimator->G1, G1->G2, G2->G3, G3->detector

  double grid_half_width() const noexcept { return 0.5 * dx * static_cast<double>(n_samples); }
  bool certified() const noexcept;
  /// Throws SamplingViolation naming the first failing leg.
  void require_certified() const;
  WaveField make_field(double wavelength) const { return make_centered_field(n_samples, dx, wavelength); }
};

/// Chooses dx and the grid length for a geometry and certifies every leg.
/// Energy spread widens the certified wavelength range to +-3 sigma.
SamplingPlan plan_sampling(const GeometrySpec& geometry, const SamplingOptions& options = {});

/// Wavelength range the plan must cover for the geometry's beam.
std::pair<double, double> wavelength_range(const BeamSpec& beam);

/// Certified propagation over leg `leg_index` of `plan`. Throws SamplingViolation if
/// the leg is not certified or the field is not on the plan's grid.
WaveField fresnel_propagate(const WaveField& field, const SamplingPlan& plan, std::size_t leg_index,
                            EdgeTreatment edges = EdgeTreatment::absorbing);

}  // namespace emzi
