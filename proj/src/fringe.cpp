#include "emzi/fringe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "emzi/constants.hpp"
#include "emzi/errors.hpp"

namespace emzi {

using constants::pi;

const char* to_string(Engine e) noexcept { return e == Engine::quantum ? "quantum" : "classical"; }

void FringeScan::validate() const {
  if (shifts.size() != fluxes.size()) throw DomainError("fringe scan: shifts and fluxes differ in length");
  for (std::size_t i = 1; i < shifts.size(); ++i) {
    if (!(shifts[i] > shifts[i - 1])) throw DomainError("fringe scan: shifts must increase strictly");
  }
  for (double f : fluxes) {
    if (!(f >= 0.0)) throw DomainError("fringe scan: fluxes must be non-negative");
  }
}

namespace {

struct LinearFit {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  double sse = 0.0;
};

// Least squares on {1, cos, sin}; solved by Cholesky on the 3x3 normal equations.
LinearFit solve_at(const FringeScan& scan, double period) {
  const std::size_t n = scan.shifts.size();
  std::array<double, 6> g{};  // symmetric Gram matrix, packed: 00 01 02 11 12 22
  std::array<double, 3> r{};
  const double k = 2.0 * pi / period;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(k * scan.shifts[i]);
    const double s = std::sin(k * scan.shifts[i]);
    const double y = scan.fluxes[i];
    g[0] += 1.0; g[1] += c; g[2] += s; g[3] += c * c; g[4] += c * s; g[5] += s * s;
    r[0] += y; r[1] += c * y; r[2] += s * y;
  }
  // Cholesky L L^T.
  const double l00 = std::sqrt(g[0]);
  const double l10 = g[1] / l00;
  const double l20 = g[2] / l00;
  const double l11 = std::sqrt(std::max(g[3] - l10 * l10, 1e-300));
  const double l21 = (g[4] - l20 * l10) / l11;
  const double l22 = std::sqrt(std::max(g[5] - l20 * l20 - l21 * l21, 1e-300));
  const double z0 = r[0] / l00;
  const double z1 = (r[1] - l10 * z0) / l11;
  const double z2 = (r[2] - l20 * z0 - l21 * z1) / l22;
  LinearFit f;
  f.a2 = z2 / l22;
  f.a1 = (z1 - l21 * f.a2) / l11;
  f.a0 = (z0 - l10 * f.a1 - l20 * f.a2) / l00;
  for (std::size_t i = 0; i < n; ++i) {
    const double model = f.a0 + f.a1 * std::cos(k * scan.shifts[i]) + f.a2 * std::sin(k * scan.shifts[i]);
    const double d = scan.fluxes[i] - model;
    f.sse += d * d;
  }
  return f;
}

}  // namespace

FringeFit fit_fringes(const FringeScan& scan, PeriodBounds bounds, const FitOptions& options) {
  scan.validate();
  if (!(bounds.lower > 0.0) || !(bounds.upper > bounds.lower)) throw DomainError("fit_fringes: invalid period bounds");
  const std::size_t n = scan.shifts.size();
  if (n < 8) throw NumericError("fit_fringes: need at least 8 samples, got " + std::to_string(n));
  const double span = scan.shifts.back() - scan.shifts.front();
  if (span < 1.5 * bounds.lower) {
    throw NumericError("fit_fringes: scan span is shorter than 1.5 periods of the lower period bound");
  }

  FringeFit fit;
  const auto [lo, hi] = std::minmax_element(scan.fluxes.begin(), scan.fluxes.end());
  const double mean = std::accumulate(scan.fluxes.begin(), scan.fluxes.end(), 0.0) / static_cast<double>(n);
  if (*hi - *lo <= 1e-14 * std::max(std::abs(*hi), 1e-300)) {
    fit.offset = mean;
    fit.period = bounds.lower;
    fit.converged = mean > 0.0;
    fit.phase_defined = false;
    return fit;
  }

  // Coarse grid.
  const auto steps = static_cast<std::size_t>(std::floor((bounds.upper - bounds.lower) / options.grid_step + 1e-9));
  double best_p = bounds.lower;
  double best_sse = solve_at(scan, best_p).sse;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double p = bounds.lower + static_cast<double>(i) * options.grid_step;
    const double sse = solve_at(scan, p).sse;
    if (sse < best_sse) {  // strict: equal residuals keep the smaller period
      best_sse = sse;
      best_p = p;
    }
  }

  // Golden-section refinement in the bracket around the coarse optimum.
  double a = std::max(bounds.lower, best_p - options.grid_step);
  double b = std::min(bounds.upper, best_p + options.grid_step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = solve_at(scan, c).sse;
  double fd = solve_at(scan, d).sse;
  for (int it = 0; it < 200 && (b - a) > options.refine_tolerance * best_p; ++it) {
    if (fc <= fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = solve_at(scan, c).sse;
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = solve_at(scan, d).sse;
    }
  }
  double p = 0.5 * (a + b);
  LinearFit lf = solve_at(scan, p);
  if (best_sse < lf.sse) {
    p = best_p;
    lf = solve_at(scan, p);
  }

  fit.period = p;
  fit.offset = lf.a0;
  fit.amplitude = std::hypot(lf.a1, lf.a2);
  fit.phase = std::atan2(-lf.a2, lf.a1);
  fit.residual_rms = std::sqrt(lf.sse / static_cast<double>(n));
  fit.converged = fit.offset > 0.0;
  fit.contrast = fit.converged ? std::clamp(fit.amplitude / fit.offset, 0.0, 1.0) : 0.0;
  return fit;
}

double evaluate(const FringeFit& fit, double x) {
  return fit.offset + fit.amplitude * std::cos(2.0 * pi * x / fit.period + fit.phase);
}

double drift_contrast_factor(const DriftModel& model, double period) {
  if (!(period > 0.0)) throw DomainError("drift: period must be positive");
  if (const auto* lin = std::get_if<LinearDrift>(&model)) {
    const double u = pi * lin->total / period;
    return u == 0.0 ? 1.0 : std::sin(u) / u;
  }
  const double s = std::get<GaussianJitter>(model).sigma / period;
  return std::exp(-2.0 * pi * pi * s * s);
}

FringeScan apply_drift(const FringeScan& scan, const DriftModel& model, const FringeFit& ideal_fit) {
  scan.validate();
  if (!(ideal_fit.period > 0.0)) throw DomainError("apply_drift: fit has no valid period");
  const double loss = 1.0 - drift_contrast_factor(model, ideal_fit.period);
  FringeScan out = scan;
  for (std::size_t i = 0; i < out.fluxes.size(); ++i) {
    const double osc = ideal_fit.amplitude * std::cos(2.0 * pi * out.shifts[i] / ideal_fit.period + ideal_fit.phase);
    out.fluxes[i] = std::max(0.0, out.fluxes[i] - loss * osc);
  }
  return out;
}

FringeScan apply_poisson_noise(const FringeScan& scan, double rate, double dwell, std::uint64_t seed, unsigned sweeps) {
  scan.validate();
  if (!(rate > 0.0) || !(dwell > 0.0)) throw DomainError("poisson noise: rate and dwell must be positive");
  if (sweeps == 0) throw DomainError("poisson noise: need at least one sweep");
  const double mean =
      std::accumulate(scan.fluxes.begin(), scan.fluxes.end(), 0.0) / static_cast<double>(scan.fluxes.size());
  FringeScan out = scan;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < out.fluxes.size(); ++i) out.fluxes[i] = 0.0;
  for (unsigned s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < scan.fluxes.size(); ++i) {
      const double mu = mean > 0.0 ? rate * dwell * scan.fluxes[i] / mean : 0.0;
      if (mu > 0.0) {
        std::poisson_distribution<long long> draw(mu);
        out.fluxes[i] += static_cast<double>(draw(rng));
      }
    }
  }
  return out;
}

std::vector<double> shift_range(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw DomainError("shift range: need step > 0 and stop >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
  return v;
}

}  // namespace emzi
