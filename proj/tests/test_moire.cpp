#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "emzi/contrast_map.hpp"
#include "emzi/errors.hpp"
#include "emzi/moire.hpp"
#include "oracles.hpp"

using namespace emzi;

namespace {

GeometrySpec defaults(double ev = 10e3) { return build_geometry(ApparatusParameters{}, BeamSpec::from_electron_volts(ev)); }

// Fraction of slit-to-slit rays landing in [lo, hi) on the detector plane.
double two_slit_acceptance(const GeometrySpec& g, double lo, double hi) {
  const double m = (g.z_detector() - g.source.z_position) / g.distances.source_to_collimator;
  double a1 = (1.0 - m) * g.source.lower(), b1 = (1.0 - m) * g.source.upper();
  if (a1 > b1) std::swap(a1, b1);
  const double a2 = m * g.collimator.lower(), b2 = m * g.collimator.upper();
  return oracle::uniform_sum_cdf(hi, a1, b1, a2, b2) - oracle::uniform_sum_cdf(lo, a1, b1, a2, b2);
}

TEST(Moire, OpenBeamlineMatchesTwoSlitAcceptance) {
  auto g = defaults();
  g.grating_inserted = {false, false, false};
  RayBundleSpec fine;
  fine.n_source_samples = fine.n_collimator_samples = 2001;
  for (double center : {0.0, 2e-6, 4.5e-6}) {
    const ApertureSpec slit{3e-6, center, g.z_detector()};
    const double exact = two_slit_acceptance(g, slit.lower(), slit.upper());
    EXPECT_NEAR(moire_flux(g, RayBundleSpec{}, slit), exact, 2e-3) << center;
    EXPECT_NEAR(moire_flux(g, fine, slit), exact, 5e-4) << center;
  }
  // A slit covering the whole geometric beam accepts every ray.
  EXPECT_DOUBLE_EQ(moire_flux(g, RayBundleSpec{}, ApertureSpec{40e-6, 0.0, g.z_detector()}), 1.0);
}

TEST(Moire, SlitOutsideBeamSeesNothing) {
  const auto g = defaults();
  EXPECT_DOUBLE_EQ(moire_flux(g, RayBundleSpec{}, ApertureSpec{5e-6, 30e-6, g.z_detector()}), 0.0);
}

TEST(Moire, FluxIsBoundedAndMonotoneInSlitWidth) {
  const auto g = defaults();
  double prev = 0.0;
  for (double w = 0.5e-6; w <= 16e-6; w += 0.5e-6) {
    const double f = moire_flux(g, RayBundleSpec{}, ApertureSpec{w, 0.7e-6, g.z_detector()});
    EXPECT_GE(f, prev);
    EXPECT_LE(f, 1.0);
    prev = f;
  }
}

TEST(Moire, NoWavelengthDependence) {
  const auto slit = ApertureSpec{5e-6, 1e-6, defaults().z_detector()};
  EXPECT_EQ(moire_flux(defaults(2e3), RayBundleSpec{}, slit), moire_flux(defaults(10e3), RayBundleSpec{}, slit));
}

TEST(Moire, GridAgreesWithMonteCarlo) {
  const auto g = defaults();
  RayBundleSpec mc;
  mc.quadrature = RayBundleSpec::Quadrature::monte_carlo;
  mc.seed = 17;
  for (double center : {0.0, 3e-6}) {
    const ApertureSpec slit{5e-6, center, g.z_detector()};
    const double grid = moire_flux(g, RayBundleSpec{}, slit);
    const auto est = moire_flux_estimate(g, mc, slit);
    EXPECT_GT(grid, 0.0);
    EXPECT_LE(std::abs(grid - est.flux), 3.0 * est.standard_error) << center;
  }
}

TEST(Moire, ScanIsPeriodicInGratingPeriod) {
  const auto g = defaults();
  const auto shifts = shift_range(0.0, 100e-9, 5e-9);
  std::vector<double> moved(shifts);
  for (auto& s : moved) s += 100e-9;
  const ApertureSpec slit{5e-6, 1e-6, g.z_detector()};
  const auto a = moire_scan(g, RayBundleSpec{}, shifts, slit);
  const auto b = moire_scan(g, RayBundleSpec{}, moved, slit);
  for (std::size_t i = 0; i < shifts.size(); ++i) EXPECT_NEAR(a.fluxes[i], b.fluxes[i], 1e-12);
}

// A 50% binary grating has no second harmonic, so a middle-grating scan carries no
// component at half the grating period: the classical scan repeats with period d.
TEST(Moire, HalfOpenGratingsGiveNoHalfPeriodComponent) {
  const auto g = defaults();
  const auto shifts = shift_range(0.0, 95e-9, 5e-9);  // one full period, 20 samples
  for (double center : {0.0, 2e-6, 5e-6}) {
    const auto scan = moire_scan(g, RayBundleSpec{}, shifts, ApertureSpec{5e-6, center, g.z_detector()});
    std::complex<double> h1{}, h2{};
    double mean = 0.0;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
      const double ph = 2.0 * std::numbers::pi * shifts[i] / 100e-9;
      h1 += scan.fluxes[i] * std::polar(1.0, -ph);
      h2 += scan.fluxes[i] * std::polar(1.0, -2.0 * ph);
      mean += scan.fluxes[i];
    }
    EXPECT_LT(std::abs(h2), 1e-12 * mean) << center;
    EXPECT_GT(std::abs(h1), 1e-3 * mean) << center;
  }
  const auto long_scan =
      moire_scan(g, RayBundleSpec{}, shift_range(0.0, 400e-9, 5e-9), ApertureSpec{5e-6, 2e-6, g.z_detector()});
  EXPECT_NEAR(fit_fringes(long_scan, {25e-9, 200e-9}).period / 100e-9, 1.0, 0.01);
}

TEST(Moire, UnequalOpenFractionGivesHalfPeriodFringes) {
  ApparatusParameters p;
  p.open_fraction = 0.4;
  const auto g = build_geometry(p, BeamSpec::from_electron_volts(10e3));
  const auto shifts = shift_range(0.0, 400e-9, 5e-9);
  const auto scan = moire_scan(g, RayBundleSpec{}, shifts, ApertureSpec{5e-6, 0.0, g.z_detector()});
  const auto fit = fit_fringes(scan, {25e-9, 200e-9});
  EXPECT_NEAR(fit.period / 50e-9, 1.0, 0.01);
}

TEST(Moire, SymmetricConfigurationGivesEvenContrastMap) {
  // Bars of G1 and G3 centered on the axis, scan centered on the matching G2 offset:
  // mirroring x -> -x maps the configuration onto itself.
  ApparatusParameters p;
  p.grating_shifts = {25e-9, 0.0, 25e-9};
  const auto g = build_geometry(p, BeamSpec::from_electron_volts(10e3));
  const auto shifts = shift_range(-175e-9, 225e-9, 5e-9);
  const auto positions = position_range(-6e-6, 6e-6, 1e-6);
  const auto map = moire_contrast_map(g, RayBundleSpec{}, positions, shifts, ContrastMapOptions{});
  for (std::size_t i = 0; i < map.size(); ++i) {
    EXPECT_NEAR(map[i].fit.contrast, map[map.size() - 1 - i].fit.contrast, 1e-6) << map[i].position;
    EXPECT_NEAR(map[i].mean_flux, map[map.size() - 1 - i].mean_flux, 1e-12);
  }
}

TEST(Moire, ConvergenceStopsWhenMaximumSettles) {
  const auto g = defaults();
  const auto shifts = shift_range(0.0, 200e-9, 5e-9);
  const auto positions = position_range(-4e-6, 4e-6, 2e-6);
  RayBundleSpec small;
  small.n_source_samples = small.n_collimator_samples = 101;
  const auto conv = converge_moire_contrast(g, small, positions, shifts, ContrastMapOptions{}, 1e-3, 2001);
  ASSERT_GE(conv.counts.size(), 2u);
  EXPECT_EQ(conv.counts[1], 201u);
  if (conv.converged) {
    EXPECT_LT(std::abs(conv.max_contrast.back() - conv.max_contrast[conv.max_contrast.size() - 2]), 1e-3);
  }
}

TEST(Moire, RejectsDegenerateBundles) {
  RayBundleSpec b;
  b.n_source_samples = 1;
  EXPECT_THROW(moire_flux(defaults(), b, ApertureSpec{5e-6, 0.0, 0.59}), DomainError);
}

}  // namespace
