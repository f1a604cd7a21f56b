#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "emzi/errors.hpp"
#include "emzi/fringe.hpp"

using namespace emzi;

namespace {

constexpr double kPi = std::numbers::pi;

FringeScan synthetic(double a, double b, double period, double phase, std::size_t n, double span,
                     double start = 0.0) {
  FringeScan s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = start + span * static_cast<double>(i) / static_cast<double>(n);
    s.shifts.push_back(x);
    s.fluxes.push_back(a + b * std::cos(2.0 * kPi * x / period + phase));
  }
  return s;
}

double wrap(double phi) { return std::remainder(phi, 2.0 * kPi); }

TEST(FitFringes, SyntheticRoundTrip) {
  const auto scan = synthetic(1.0, 0.25, 50e-9, 0.3, 40, 200e-9);
  const auto fit = fit_fringes(scan, {25e-9, 200e-9});
  EXPECT_TRUE(fit.converged);
  EXPECT_TRUE(fit.phase_defined);
  EXPECT_NEAR(fit.contrast, 0.25, 1e-6);
  EXPECT_NEAR(fit.period, 50e-9, 1e-6 * 50e-9);
  EXPECT_NEAR(fit.phase, 0.3, 1e-6);
  EXPECT_NEAR(fit.offset, 1.0, 1e-6);
  EXPECT_LT(fit.residual_rms, 1e-9);
}

TEST(FitFringes, RoundTripAcrossRandomParameters) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> per(30e-9, 180e-9), con(0.02, 0.95), ph(-3.0, 3.0);
  for (int t = 0; t < 25; ++t) {
    const double p = per(rng), c = con(rng), phi = ph(rng);
    const auto scan = synthetic(2.0, 2.0 * c, p, phi, 80, 4.0 * 200e-9);
    const auto fit = fit_fringes(scan, {25e-9, 200e-9});
    EXPECT_NEAR(fit.period / p, 1.0, 1e-6);
    EXPECT_NEAR(fit.contrast, c, 1e-6);
    EXPECT_NEAR(wrap(fit.phase - phi), 0.0, 1e-5);
  }
}

TEST(FitFringes, ConstantScanHasNoPhase) {
  FringeScan s;
  for (int i = 0; i < 20; ++i) {
    s.shifts.push_back(i * 5e-9);
    s.fluxes.push_back(3.5);
  }
  const auto fit = fit_fringes(s, {25e-9, 200e-9});
  EXPECT_TRUE(fit.converged);
  EXPECT_FALSE(fit.phase_defined);
  EXPECT_DOUBLE_EQ(fit.contrast, 0.0);
  EXPECT_DOUBLE_EQ(fit.offset, 3.5);
}

TEST(FitFringes, InvariantUnderFluxScaling) {
  auto scan = synthetic(0.7, 0.2, 47e-9, -1.1, 50, 220e-9);
  scan.fluxes[7] += 0.03;  // break the pure sinusoid so the test is not trivial
  const auto base = fit_fringes(scan, {25e-9, 200e-9});
  for (double k : {1e-6, 0.37, 12.0, 4e5}) {
    auto scaled = scan;
    for (auto& f : scaled.fluxes) f *= k;
    const auto fit = fit_fringes(scaled, {25e-9, 200e-9});
    EXPECT_NEAR(fit.contrast, base.contrast, 1e-9);
    EXPECT_NEAR(fit.period, base.period, 1e-9 * base.period);
    EXPECT_NEAR(wrap(fit.phase - base.phase), 0.0, 1e-8);
  }
}

TEST(FitFringes, PhaseFollowsShiftDisplacement) {
  const auto scan = synthetic(1.0, 0.4, 50e-9, 0.2, 60, 240e-9);
  const auto base = fit_fringes(scan, {25e-9, 200e-9});
  for (double delta : {3e-9, 17e-9, 61e-9}) {
    auto moved = scan;
    for (auto& x : moved.shifts) x += delta;
    const auto fit = fit_fringes(moved, {25e-9, 200e-9});
    EXPECT_NEAR(wrap(fit.phase - (base.phase - 2.0 * kPi * delta / base.period)), 0.0, 1e-6);
  }
}

TEST(FitFringes, RejectsShortOrSparseScans) {
  auto few = synthetic(1.0, 0.2, 50e-9, 0.0, 7, 200e-9);
  EXPECT_THROW(fit_fringes(few, {25e-9, 200e-9}), NumericError);
  // 30 nm steps over 100 nm: fewer than 8 samples.
  FringeScan coarse;
  for (double x = 0.0; x <= 100e-9; x += 30e-9) {
    coarse.shifts.push_back(x);
    coarse.fluxes.push_back(1.0 + 0.2 * std::cos(2 * kPi * x / 50e-9));
  }
  EXPECT_THROW(fit_fringes(coarse, {25e-9, 200e-9}), NumericError);
  auto narrow = synthetic(1.0, 0.2, 50e-9, 0.0, 20, 30e-9);
  EXPECT_THROW(fit_fringes(narrow, {25e-9, 200e-9}), NumericError);
  FringeScan bad = synthetic(1.0, 0.2, 50e-9, 0.0, 20, 200e-9);
  std::swap(bad.shifts[3], bad.shifts[4]);
  EXPECT_THROW(fit_fringes(bad, {25e-9, 200e-9}), DomainError);
}

TEST(Drift, ClosedFormFactors) {
  EXPECT_NEAR(drift_contrast_factor(GaussianJitter{10e-9}, 50e-9), std::exp(-2.0 * kPi * kPi * 0.04), 1e-15);
  EXPECT_NEAR(drift_contrast_factor(GaussianJitter{10e-9}, 50e-9), 0.4540, 1e-4);
  EXPECT_NEAR(drift_contrast_factor(LinearDrift{10e-9}, 50e-9), std::sin(0.2 * kPi) / (0.2 * kPi), 1e-15);
  EXPECT_NEAR(drift_contrast_factor(LinearDrift{10e-9}, 50e-9), 0.9355, 1e-4);
  EXPECT_DOUBLE_EQ(drift_contrast_factor(LinearDrift{0.0}, 50e-9), 1.0);
}

TEST(Drift, ZeroDriftLeavesScanUnchanged) {
  const auto scan = synthetic(1.0, 0.3, 50e-9, 0.5, 40, 200e-9);
  const auto fit = fit_fringes(scan, {25e-9, 200e-9});
  const auto out = apply_drift(scan, LinearDrift{0.0}, fit);
  for (std::size_t i = 0; i < scan.fluxes.size(); ++i) EXPECT_DOUBLE_EQ(out.fluxes[i], scan.fluxes[i]);
}

TEST(Drift, ReducesAmplitudeKeepingPeriodAndPhase) {
  const auto scan = synthetic(1.0, 0.3, 50e-9, 0.5, 40, 200e-9);
  const auto fit = fit_fringes(scan, {25e-9, 200e-9});
  for (const DriftModel m : {DriftModel{LinearDrift{10e-9}}, DriftModel{GaussianJitter{4e-9}}}) {
    const auto degraded = fit_fringes(apply_drift(scan, m, fit), {25e-9, 200e-9});
    EXPECT_LT(degraded.amplitude, fit.amplitude);
    EXPECT_NEAR(degraded.amplitude / fit.amplitude, drift_contrast_factor(m, fit.period), 1e-6);
    EXPECT_NEAR(degraded.period, fit.period, 1e-6 * fit.period);
    EXPECT_NEAR(wrap(degraded.phase - fit.phase), 0.0, 1e-6);
  }
}

TEST(Poisson, ReproducibleForFixedSeed) {
  const auto scan = synthetic(1.0, 0.25, 50e-9, 0.0, 50, 250e-9);
  const auto a = apply_poisson_noise(scan, 200.0, 1.0, 42, 20);
  const auto b = apply_poisson_noise(scan, 200.0, 1.0, 42, 20);
  const auto c = apply_poisson_noise(scan, 200.0, 1.0, 43, 20);
  EXPECT_EQ(a.fluxes, b.fluxes);
  EXPECT_NE(a.fluxes, c.fluxes);
  for (double v : a.fluxes) EXPECT_EQ(v, std::floor(v));
}

TEST(Poisson, LargeDwellRecoversNoiselessContrast) {
  const auto scan = synthetic(1.0, 0.25, 50e-9, 0.0, 50, 250e-9);
  const auto clean = fit_fringes(scan, {25e-9, 200e-9});
  const auto noisy = fit_fringes(apply_poisson_noise(scan, 1e6, 1.0, 5), {25e-9, 200e-9});
  EXPECT_NEAR(noisy.contrast / clean.contrast, 1.0, 0.01);
}

TEST(Poisson, TypicalCountRateRecoversPeriod) {
  // 200 counts/s, 1 s dwell, 50 points, 20 summed sweeps, contrast 0.25.
  const auto scan = synthetic(1.0, 0.25, 50e-9, 0.0, 50, 250e-9);
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto fit = fit_fringes(apply_poisson_noise(scan, 200.0, 1.0, seed, 20), {25e-9, 200e-9});
    if (std::abs(fit.period / 50e-9 - 1.0) <= 0.05) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(ShiftRange, InclusiveLattice) {
  const auto v = shift_range(0.0, 200e-9, 5e-9);
  ASSERT_EQ(v.size(), 41u);
  EXPECT_DOUBLE_EQ(v.back(), 200e-9);
  EXPECT_THROW(shift_range(0.0, 1.0, 0.0), DomainError);
}

}  // namespace
