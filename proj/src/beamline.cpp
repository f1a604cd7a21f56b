#include "emzi/beamline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emzi/constants.hpp"
#include "emzi/errors.hpp"

namespace emzi {

double wavelength_from_energy(double kinetic_energy) {
  if (!(kinetic_energy > 0.0) || !std::isfinite(kinetic_energy)) {
    throw DomainError("kinetic energy must be positive and finite");
  }
  using namespace constants;
  // p c = sqrt(E_k (E_k + 2 m c^2))
  const double pc = std::sqrt(kinetic_energy * (kinetic_energy + 2.0 * electron_rest_energy));
  return planck * speed_of_light / pc;
}

double talbot_length(double grating_period, double wavelength) {
  if (!(grating_period > 0.0) || !(wavelength > 0.0)) {
    throw DomainError("talbot_length: period and wavelength must be positive");
  }
  return grating_period * grating_period / wavelength;
}

BeamSpec::BeamSpec(double kinetic_energy, double energy_spread_sigma)
    : kinetic_energy_(kinetic_energy),
      energy_spread_sigma_(energy_spread_sigma),
      wavelength_(wavelength_from_energy(kinetic_energy)) {
  if (!(energy_spread_sigma >= 0.0)) throw DomainError("energy spread must be >= 0");
}

BeamSpec BeamSpec::from_electron_volts(double ev, double spread_ev) {
  return BeamSpec(electron_volts(ev), electron_volts(spread_ev));
}

double BeamSpec::kinetic_energy_ev() const noexcept { return to_electron_volts(kinetic_energy_); }

void GratingSpec::validate() const {
  if (!(period > 0.0)) throw DomainError("grating period must be positive");
  if (!(open_fraction > 0.0 && open_fraction < 1.0)) throw DomainError("grating open fraction must lie in (0, 1)");
  if (n_periods_window < 1) throw DomainError("grating window must hold at least one period");
  if (!std::isfinite(lateral_shift)) throw DomainError("grating lateral shift must be finite");
}

bool GratingSpec::transmits(double x) const noexcept {
  const double half = window_half_width();
  if (x < -half || x >= half) return false;
  const double t = (x - lateral_shift) / period;
  return (t - std::floor(t)) < open_fraction;
}

void ApertureSpec::validate() const {
  if (!(width > 0.0)) throw DomainError("aperture width must be positive");
  if (!std::isfinite(center)) throw DomainError("aperture center must be finite");
}

void BeamlineDistances::validate() const {
  for (double d : {source_to_collimator, collimator_to_grating1, grating1_to_grating2, grating2_to_grating3,
                   grating3_to_detector}) {
    if (!(d > 0.0)) throw DomainError("beamline distances must be positive (planes may not coincide)");
  }
}

void GeometrySpec::validate() const {
  distances.validate();
  source.validate();
  collimator.validate();
  detector_slit.validate();
  for (const auto& g : gratings) g.validate();
  const std::array<double, 6> z{source.z_position,        collimator.z_position,    gratings[0].z_position,
                                gratings[1].z_position,   gratings[2].z_position,   detector_slit.z_position};
  const std::array<double, 5> gaps{distances.source_to_collimator, distances.collimator_to_grating1,
                                   distances.grating1_to_grating2, distances.grating2_to_grating3,
                                   distances.grating3_to_detector};
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (!(z[i] > z[i - 1])) throw DomainError("beamline z positions must increase strictly");
    const double gap = z[i] - z[i - 1];
    if (std::abs(gap - gaps[i - 1]) > 1e-12 * std::max(1.0, z[i])) {
      throw DomainError("element z positions disagree with beamline distances");
    }
  }
}

double GeometrySpec::order_offset_at_detector(int order, std::size_t grating_index) const {
  const double angle = beam.wavelength() / gratings.at(grating_index).period;
  return order * angle * (z_detector() - gratings.at(grating_index).z_position);
}

GeometrySpec build_geometry(const ApparatusParameters& p, const BeamSpec& beam) {
  p.distances.validate();
  GeometrySpec g;
  g.beam = beam;
  g.distances = p.distances;

  double z = 0.0;
  g.source = ApertureSpec{p.source_width, p.source_center, z};
  z += p.distances.source_to_collimator;
  g.collimator = ApertureSpec{p.collimator_width, p.collimator_center, z};
  z += p.distances.collimator_to_grating1;
  const std::array<double, 3> gaps{0.0, p.distances.grating1_to_grating2, p.distances.grating2_to_grating3};
  for (std::size_t i = 0; i < 3; ++i) {
    z += gaps[i];
    g.gratings[i] = GratingSpec{p.grating_period, p.open_fraction, p.grating_shifts[i], z, 1};
  }
  z += p.distances.grating3_to_detector;
  g.detector_slit = ApertureSpec{p.detector_slit_width, p.detector_slit_center, z};

  for (std::size_t i = 0; i < 3; ++i) {
    g.gratings[i].n_periods_window = p.n_periods_window > 0 ? p.n_periods_window : default_window_periods(g, i);
  }
  g.validate();
  return g;
}

double beam_footprint_half_width(const GeometrySpec& g, double z) {
  const double base = g.distances.source_to_collimator;
  const double beyond = z - g.collimator.z_position;
  // Extreme straight rays: source edge through the opposite collimator edge.
  const double hi = g.collimator.upper() + (g.collimator.upper() - g.source.lower()) * beyond / base;
  const double lo = g.collimator.lower() + (g.collimator.lower() - g.source.upper()) * beyond / base;
  const double diffraction = beyond > 0.0 ? g.beam.wavelength() * beyond / g.collimator.width : 0.0;
  return std::max(std::abs(hi), std::abs(lo)) + diffraction;
}

double diffracted_reach(const GeometrySpec& g, std::size_t grating_index) {
  const double z = g.gratings.at(grating_index).z_position;
  double reach = 0.0;
  for (std::size_t j = 0; j < grating_index; ++j) {
    reach += g.beam.wavelength() / g.gratings[j].period * (z - g.gratings[j].z_position);
  }
  return reach;
}

double required_window_half_width(const GeometrySpec& g, std::size_t grating_index) {
  const double z = g.gratings.at(grating_index).z_position;
  return diffracted_reach(g, grating_index) + 4.0 * beam_footprint_half_width(g, z);
}

std::size_t default_window_periods(const GeometrySpec& g, std::size_t grating_index) {
  // Even count: the window edges then fall on period boundaries of an unshifted grating.
  const double period = g.gratings.at(grating_index).period;
  const double half = required_window_half_width(g, grating_index);
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(2.0 * half / period)));
  return n + (n % 2);
}

double output_port_position(const GeometrySpec& g, int port) {
  const double axis = g.source.center + (g.collimator.center - g.source.center) * g.z_detector() /
                                            g.distances.source_to_collimator;
  switch (port) {
    case 0:
      return axis;
    case 1:
      return axis + g.order_offset_at_detector(+1, 1);
    case 2:
      return axis + g.order_offset_at_detector(-1, 1);
    default:
      throw DomainError("output port must be 0, 1 or 2, got " + std::to_string(port));
  }
}

MachZehnderReport mach_zehnder_criterion(double wavelength, double grating_period, double collimator_width,
                                         double collimator_to_g2, double g1_to_g2) {
  if (!(wavelength > 0.0) || !(grating_period > 0.0) || !(collimator_width > 0.0)) {
    throw DomainError("mach_zehnder_criterion: wavelength, period and slit width must be positive");
  }
  MachZehnderReport r;
  r.order_separation_at_g2 = wavelength / grating_period * g1_to_g2;
  r.beam_width_at_g2 = collimator_width + 2.0 * wavelength * collimator_to_g2 / collimator_width;
  r.ratio = r.order_separation_at_g2 / r.beam_width_at_g2;
  return r;
}

MachZehnderReport mach_zehnder_criterion(const GeometrySpec& g) {
  return mach_zehnder_criterion(g.beam.wavelength(), g.gratings[1].period, g.collimator.width,
                                g.distances.collimator_to_grating1 + g.distances.grating1_to_grating2,
                                g.distances.grating1_to_grating2);
}

}  // namespace emzi
