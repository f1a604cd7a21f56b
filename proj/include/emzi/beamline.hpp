#pragma once

#include <array>
#include <cstddef>

namespace emzi {

/// Relativistic de Broglie wavelength [m] of an electron with the given kinetic energy [J].
/// Throws DomainError for non-positive energy.
double wavelength_from_energy(double kinetic_energy);

/// Self-imaging length d^2 / lambda [m]. Throws DomainError for non-positive input.
double talbot_length(double grating_period, double wavelength);

/// Monoenergetic electron beam with optional Gaussian energy spread.
class BeamSpec {
 public:
  /// kinetic_energy and energy_spread_sigma in joules.
  explicit BeamSpec(double kinetic_energy, double energy_spread_sigma = 0.0);

  static BeamSpec from_electron_volts(double ev, double spread_ev = 0.0);

  double kinetic_energy() const noexcept { return kinetic_energy_; }
  double energy_spread_sigma() const noexcept { return energy_spread_sigma_; }
  double wavelength() const noexcept { return wavelength_; }
  double kinetic_energy_ev() const noexcept;

 private:
  double kinetic_energy_;
  double energy_spread_sigma_;
  double wavelength_;
};

/// Binary amplitude grating: bars are infinitely thin perfect absorbers.
/// Transmission is 1 iff frac((x - lateral_shift) / period) < open_fraction,
/// inside a window of n_periods_window periods centered on the beam axis.
struct GratingSpec {
  double period = 100e-9;
  double open_fraction = 0.5;
  double lateral_shift = 0.0;
  double z_position = 0.0;
  std::size_t n_periods_window = 1;

  void validate() const;
  double window_half_width() const noexcept { return 0.5 * period * static_cast<double>(n_periods_window); }
  bool transmits(double x) const noexcept;
};

/// Slit of given width centered at `center`; open on [center - w/2, center + w/2).
struct ApertureSpec {
  double width = 1e-6;
  double center = 0.0;
  double z_position = 0.0;

  void validate() const;
  double lower() const noexcept { return center - 0.5 * width; }
  double upper() const noexcept { return center + 0.5 * width; }
  bool transmits(double x) const noexcept { return x >= lower() && x < upper(); }
};

/// Distances between consecutive beamline planes [m]. These are the values every
/// engine propagates over; element z positions are derived from them.
struct BeamlineDistances {
  double source_to_collimator = 0.24;
  double collimator_to_grating1 = 0.03;
  double grating1_to_grating2 = 0.0254;
  double grating2_to_grating3 = 0.0254;
  double grating3_to_detector = 0.27;

  void validate() const;
};

/// Apparatus parameters from which a GeometrySpec is assembled. Defaults are the
/// as-built three-grating electron interferometer.
struct ApparatusParameters {
  BeamlineDistances distances{};
  double source_width = 5e-6;
  double source_center = 0.0;
  double collimator_width = 1.5e-6;
  double collimator_center = 0.0;
  double grating_period = 100e-9;
  double open_fraction = 0.5;
  std::array<double, 3> grating_shifts{0.0, 0.0, 0.0};
  /// 0 selects the computed per-grating default (see required_window_half_width).
  std::size_t n_periods_window = 0;
  double detector_slit_width = 5e-6;
  double detector_slit_center = 0.0;
};

/// The ordered beamline: incoherent source slit, collimator slit, three gratings,
/// detector slit. Gratings can be pulled out of the beam (grating_inserted = false).
struct GeometrySpec {
  ApertureSpec source;
  ApertureSpec collimator;
  std::array<GratingSpec, 3> gratings;
  std::array<bool, 3> grating_inserted{true, true, true};
  ApertureSpec detector_slit;
  BeamlineDistances distances;
  BeamSpec beam = BeamSpec::from_electron_volts(10e3);

  /// Throws DomainError unless all element invariants hold and z increases strictly.
  void validate() const;

  double z_detector() const noexcept { return detector_slit.z_position; }

  /// Transverse position on the detector plane of diffraction order `order`
  /// leaving grating `grating_index` (small-angle, on-axis beam).
  double order_offset_at_detector(int order, std::size_t grating_index) const;
};

/// Builds a validated geometry with z(source) = 0.
GeometrySpec build_geometry(const ApparatusParameters& params, const BeamSpec& beam);

/// Half-width about the axis of the illuminated region at plane z: geometric
/// penumbra of the two collimation slits plus single-slit diffraction growth.
double beam_footprint_half_width(const GeometrySpec& geometry, double z);

/// Lateral reach at grating `grating_index` of the path taking the +1 order at every
/// upstream grating.
double diffracted_reach(const GeometrySpec& geometry, std::size_t grating_index);

/// Half-width a grating window needs so no first-order path is clipped: the
/// diffracted reach plus the straight-beam footprint with a 4x margin.
double required_window_half_width(const GeometrySpec& geometry, std::size_t grating_index);

/// Smallest even number of periods covering required_window_half_width.
std::size_t default_window_periods(const GeometrySpec& geometry, std::size_t grating_index);

/// Detector-plane center of an interferometer output port. Port 0 is the zero order,
/// port 1 the +1 order group and port 2 the -1 order group.
double output_port_position(const GeometrySpec& geometry, int port);

struct MachZehnderReport {
  double beam_width_at_g2 = 0.0;
  double order_separation_at_g2 = 0.0;
  double ratio = 0.0;
};

/// Far-field (Mach-Zehnder) regime check: first-order separation at the second
/// grating versus collimated beam width (slit width + 2 lambda L / width).
MachZehnderReport mach_zehnder_criterion(const GeometrySpec& geometry);
MachZehnderReport mach_zehnder_criterion(double wavelength, double grating_period, double collimator_width,
                                         double collimator_to_g2, double g1_to_g2);

}  // namespace emzi
