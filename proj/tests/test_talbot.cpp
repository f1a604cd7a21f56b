#include <gtest/gtest.h>

#include <cmath>

#include "emzi/constants.hpp"
#include "emzi/talbot.hpp"

using namespace emzi;

namespace {

const double kLambda = wavelength_from_energy(electron_volts(10e3));

GratingSpec half_open() {
  GratingSpec g;
  g.period = 100e-9;
  g.open_fraction = 0.5;
  return g;
}

// With L_T = d^2 / lambda every harmonic m picks up exp(-i pi m^2 z / L_T): identity at
// z = 2 L_T, a d/2 translation at z = L_T, and at L_T / 2 the two half-shifted copies
// of a 50% grating tile the period, giving uniform intensity.
TEST(Talbot, SelfImageAtTwiceTheLength) {
  const double lt = talbot_length(100e-9, kLambda);
  const auto c = talbot_carpet(half_open(), kLambda, 2.0 * lt, 8);
  EXPECT_GT(periodic_correlation(c.slices.back(), c.grating_intensity), 0.95);
  EXPECT_NEAR(periodic_correlation(c.slices.back(), c.grating_intensity), 1.0, 1e-9);
}

TEST(Talbot, HalfPeriodShiftAtTheLength) {
  const double lt = talbot_length(100e-9, kLambda);
  const auto slice = talbot_slice(half_open(), kLambda, lt);
  const auto grating = talbot_carpet(half_open(), kLambda, lt, 1).grating_intensity;
  EXPECT_GT(periodic_correlation(slice, grating, 50e-9), 0.95);
  EXPECT_LT(periodic_correlation(slice, grating, 0.0), -0.95);
  EXPECT_NEAR(dominant_period(slice), 100e-9, 1e-15);
}

TEST(Talbot, UniformAtHalfTheLengthForHalfOpenGrating) {
  const double lt = talbot_length(100e-9, kLambda);
  EXPECT_LT(pattern_contrast(talbot_slice(half_open(), kLambda, 0.5 * lt)), 1e-9);
}

TEST(Talbot, OtherOpenFractionsAreNotUniformAtHalfLength) {
  // The half-shifted copies overlap, so L_T / 2 is no longer uniform.
  auto g = half_open();
  g.open_fraction = 0.3;
  const double lt = talbot_length(100e-9, kLambda);
  EXPECT_GT(pattern_contrast(talbot_slice(g, kLambda, 0.5 * lt)), 0.1);
  const auto c = talbot_carpet(g, kLambda, 2.0 * lt, 4);
  EXPECT_NEAR(periodic_correlation(c.slices.back(), c.grating_intensity), 1.0, 1e-9);
}

TEST(Talbot, CarpetPlanesAreEvenlySpaced) {
  const auto c = talbot_carpet(half_open(), kLambda, 1e-3, 10);
  ASSERT_EQ(c.z.size(), 10u);
  EXPECT_DOUBLE_EQ(c.z.back(), 1e-3);
  EXPECT_NEAR(c.z[0], 1e-4, 1e-18);
  EXPECT_NEAR(c.talbot_length, talbot_length(100e-9, kLambda), 0.0);
}

TEST(Talbot, ReportAnnotatesMismatch) {
  const auto r = talbot_report(100e-9, kLambda, 0.0254);
  EXPECT_NEAR(r.ratio, 31.0, 1.0);
  EXPECT_EQ(r.nearest_multiple, 31);
  EXPECT_NEAR(r.mismatch, std::abs(r.ratio - 31.0), 1e-15);
  for (double ev : {6e3, 8e3}) {
    const double lam = wavelength_from_energy(electron_volts(ev));
    EXPECT_NEAR(talbot_report(100e-9, lam, 0.0254).talbot_length * lam, 1e-14, 1e-27);
  }
}

}  // namespace
