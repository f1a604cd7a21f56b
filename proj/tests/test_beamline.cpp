#include <gtest/gtest.h>

#include <cmath>

#include "emzi/beamline.hpp"
#include "emzi/constants.hpp"
#include "emzi/errors.hpp"

using namespace emzi;

namespace {

// Reference wavelengths evaluated at 30 digits from the relativistic dispersion with
// the same CODATA constants.
TEST(Wavelength, MatchesRelativisticReference) {
  EXPECT_NEAR(wavelength_from_energy(electron_volts(10e3)), 1.2204695032257905e-11, 1e-24);
  EXPECT_NEAR(wavelength_from_energy(electron_volts(8e3)), 1.3658505299625033e-11, 1e-24);
  EXPECT_NEAR(wavelength_from_energy(electron_volts(6e3)), 1.5786817909419089e-11, 1e-24);
}

TEST(Wavelength, DecreasesWithEnergy) {
  double prev = wavelength_from_energy(electron_volts(1.0));
  for (double ev = 2.0; ev < 1e7; ev *= 1.7) {
    const double lam = wavelength_from_energy(electron_volts(ev));
    EXPECT_LT(lam, prev);
    prev = lam;
  }
}

TEST(Wavelength, NonRelativisticAndUltraRelativisticLimits) {
  const double e_lo = electron_volts(1.0);
  const double nr = constants::planck / std::sqrt(2.0 * constants::electron_mass * e_lo);
  EXPECT_NEAR(wavelength_from_energy(e_lo) / nr, 1.0, 1e-5);
  const double e_hi = electron_volts(1e12);
  const double ur = constants::planck * constants::speed_of_light / e_hi;
  EXPECT_NEAR(wavelength_from_energy(e_hi) / ur, 1.0, 1e-5);
}

TEST(Wavelength, RejectsNonPositiveEnergy) {
  EXPECT_THROW(wavelength_from_energy(0.0), DomainError);
  EXPECT_THROW(wavelength_from_energy(-1.0), DomainError);
  EXPECT_THROW(BeamSpec::from_electron_volts(-5.0), DomainError);
}

TEST(Talbot, LengthAtTenKeV) {
  const double lam = wavelength_from_energy(electron_volts(10e3));
  const double lt = talbot_length(100e-9, lam);
  EXPECT_NEAR(lt, 0.82e-3, 0.01 * 0.82e-3);
  EXPECT_NEAR(lt, 8.1935681e-4, 1e-11);
  EXPECT_NEAR(0.0254 / lt, 31.0, 0.01);
}

TEST(Talbot, ScalesAsPeriodSquaredOverWavelength) {
  const double lam = 1.2e-11;
  const double base = talbot_length(100e-9, lam);
  for (double s : {0.5, 1.7, 3.0}) {
    EXPECT_NEAR(talbot_length(s * 100e-9, lam) / base, s * s, 1e-12);
    EXPECT_NEAR(talbot_length(100e-9, s * lam) / base, 1.0 / s, 1e-12);
  }
  EXPECT_THROW(talbot_length(0.0, lam), DomainError);
  EXPECT_THROW(talbot_length(1e-7, 0.0), DomainError);
}

TEST(Geometry, DefaultsValidateAndPreserveDistances) {
  const auto g = build_geometry(ApparatusParameters{}, BeamSpec::from_electron_volts(10e3));
  EXPECT_NO_THROW(g.validate());
  EXPECT_DOUBLE_EQ(g.source.z_position, 0.0);
  EXPECT_DOUBLE_EQ(g.collimator.z_position, 0.24);
  EXPECT_NEAR(g.gratings[1].z_position - g.gratings[0].z_position, 0.0254, 1e-15);
  EXPECT_NEAR(g.z_detector(), 0.24 + 0.03 + 0.0254 + 0.0254 + 0.27, 1e-15);
  for (const auto& gr : g.gratings) {
    EXPECT_DOUBLE_EQ(gr.period, 100e-9);
    EXPECT_GE(gr.window_half_width(), beam_footprint_half_width(g, gr.z_position));
  }
}

TEST(Geometry, RejectsInvalidElements) {
  ApparatusParameters p;
  p.open_fraction = 1.0;
  EXPECT_THROW(build_geometry(p, BeamSpec::from_electron_volts(10e3)), DomainError);
  p = {};
  p.grating_period = -1e-9;
  EXPECT_THROW(build_geometry(p, BeamSpec::from_electron_volts(10e3)), DomainError);
  p = {};
  p.distances.grating1_to_grating2 = 0.0;
  EXPECT_THROW(build_geometry(p, BeamSpec::from_electron_volts(10e3)), DomainError);
  p = {};
  p.collimator_width = 0.0;
  EXPECT_THROW(build_geometry(p, BeamSpec::from_electron_volts(10e3)), DomainError);
}

TEST(Geometry, GratingTransmissionRule) {
  GratingSpec g;
  g.period = 100e-9;
  g.open_fraction = 0.5;
  g.n_periods_window = 10;
  EXPECT_TRUE(g.transmits(0.0));
  EXPECT_TRUE(g.transmits(49e-9));
  EXPECT_FALSE(g.transmits(51e-9));
  EXPECT_FALSE(g.transmits(-1e-9));
  EXPECT_FALSE(g.transmits(1e-6));  // outside the window
  g.lateral_shift = 25e-9;
  EXPECT_FALSE(g.transmits(10e-9));
  EXPECT_TRUE(g.transmits(30e-9));
}

TEST(MachZehnder, DefaultsAreInTheSeparatedRegime) {
  const auto g = build_geometry(ApparatusParameters{}, BeamSpec::from_electron_volts(10e3));
  const auto r = mach_zehnder_criterion(g);
  const double lam = g.beam.wavelength();
  EXPECT_NEAR(r.order_separation_at_g2, lam / 100e-9 * 0.0254, 1e-15);
  EXPECT_NEAR(r.beam_width_at_g2, 1.5e-6 + 2.0 * lam * (0.03 + 0.0254) / 1.5e-6, 1e-15);
  EXPECT_GT(r.ratio, 1.0);
}

TEST(MachZehnder, ZeroSeparationDistanceIsNotSeparated) {
  const auto r = mach_zehnder_criterion(1.22e-11, 100e-9, 1.5e-6, 0.0554, 0.0);
  EXPECT_DOUBLE_EQ(r.order_separation_at_g2, 0.0);
  EXPECT_LT(r.ratio, 1.0);
}

TEST(Ports, SymmetricFirstOrderPorts) {
  const auto g = build_geometry(ApparatusParameters{}, BeamSpec::from_electron_volts(10e3));
  const double p1 = output_port_position(g, 1);
  EXPECT_NEAR(p1, g.beam.wavelength() / 100e-9 * (g.z_detector() - g.gratings[1].z_position), 1e-15);
  EXPECT_DOUBLE_EQ(output_port_position(g, 2), -p1);
  EXPECT_DOUBLE_EQ(output_port_position(g, 0), 0.0);
  EXPECT_THROW(output_port_position(g, 3), DomainError);
}

}  // namespace
