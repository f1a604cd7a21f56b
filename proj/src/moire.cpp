#include "emzi/moire.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "emzi/errors.hpp"
#include "emzi/parallel.hpp"

namespace emzi {

void RayBundleSpec::validate() const {
  if (quadrature == Quadrature::deterministic_grid && (n_source_samples < 2 || n_collimator_samples < 2)) {
    throw DomainError("ray bundle: deterministic grid needs at least 2 samples per slit");
  }
  if (quadrature == Quadrature::monte_carlo && n_rays < 1) throw DomainError("ray bundle: need at least one ray");
}

namespace {

struct Ray {
  double weight;
  std::array<double, 3> at_grating;
  double at_detector;
};

bool inside_closed(const ApertureSpec& a, double x) { return x >= a.lower() && x <= a.upper(); }

std::vector<Ray> trace_rays(const GeometrySpec& g, const RayBundleSpec& b) {
  g.validate();
  b.validate();
  const double base = g.distances.source_to_collimator;
  auto make = [&](double xs, double xc, double w) {
    Ray r{w, {}, 0.0};
    const double slope = (xc - xs) / base;
    for (std::size_t i = 0; i < 3; ++i) r.at_grating[i] = xs + slope * (g.gratings[i].z_position - g.source.z_position);
    r.at_detector = xs + slope * (g.z_detector() - g.source.z_position);
    return r;
  };
  std::vector<Ray> rays;
  if (b.quadrature == RayBundleSpec::Quadrature::deterministic_grid) {
    const std::size_t ns = b.n_source_samples, nc = b.n_collimator_samples;
    rays.reserve(ns * nc);
    for (std::size_t i = 0; i < ns; ++i) {
      const double xs = g.source.lower() + g.source.width * static_cast<double>(i) / static_cast<double>(ns - 1);
      const double ws = (i == 0 || i + 1 == ns) ? 0.5 : 1.0;
      for (std::size_t j = 0; j < nc; ++j) {
        const double xc =
            g.collimator.lower() + g.collimator.width * static_cast<double>(j) / static_cast<double>(nc - 1);
        const double wc = (j == 0 || j + 1 == nc) ? 0.5 : 1.0;
        if (!inside_closed(g.source, xs) || !inside_closed(g.collimator, xc)) continue;
        rays.push_back(make(xs, xc, ws * wc));
      }
    }
  } else {
    std::mt19937_64 rng(b.seed);
    std::uniform_real_distribution<double> us(g.source.lower(), g.source.upper());
    std::uniform_real_distribution<double> uc(g.collimator.lower(), g.collimator.upper());
    rays.reserve(b.n_rays);
    for (std::size_t i = 0; i < b.n_rays; ++i) {
      const double xs = us(rng);
      const double xc = uc(rng);
      rays.push_back(make(xs, xc, 1.0));
    }
  }
  return rays;
}

double total_weight(const std::vector<Ray>& rays) {
  double w = 0.0;
  for (const auto& r : rays) w += r.weight;
  return w;
}

// Regular ray lattices put many rays exactly on bar edges, where rounding would pick
// a side arbitrarily. A ray within kEdge (relative) of any edge counts half, the
// value the trapezoid rule assigns to a step discontinuity.
constexpr double kEdge = 1e-9;

double indicator(double x, double lo, double hi, double scale) {
  const double tol = kEdge * scale;
  if (x < lo - tol || x > hi + tol) return 0.0;
  if (std::abs(x - lo) <= tol || std::abs(x - hi) <= tol) return 0.5;
  return 1.0;
}

double slit_weight(const ApertureSpec& a, double x) { return indicator(x, a.lower(), a.upper(), a.width); }

double grating_weight(const GeometrySpec& g, const Ray& r, std::size_t i, double shift) {
  if (!g.grating_inserted[i]) return 1.0;
  const GratingSpec& gr = g.gratings[i];
  const double x = r.at_grating[i];
  const double half = gr.window_half_width();
  const double window = indicator(x, -half, half, gr.period);
  if (window == 0.0) return 0.0;
  const double u = (x - shift) / gr.period;
  const double frac = u - std::floor(u);
  double bars;
  if (frac <= kEdge || frac >= 1.0 - kEdge || std::abs(frac - gr.open_fraction) <= kEdge) {
    bars = 0.5;
  } else {
    bars = frac < gr.open_fraction ? 1.0 : 0.0;
  }
  return window * bars;
}

}  // namespace

MoireEstimate moire_flux_estimate(const GeometrySpec& g, const RayBundleSpec& b, const ApertureSpec& slit) {
  const auto rays = trace_rays(g, b);
  const double total = total_weight(rays);
  double accepted = 0.0;
  for (const auto& r : rays) {
    double w = r.weight * slit_weight(slit, r.at_detector);
    for (std::size_t i = 0; i < 3 && w > 0.0; ++i) w *= grating_weight(g, r, i, g.gratings[i].lateral_shift);
    accepted += w;
  }
  MoireEstimate e;
  e.flux = accepted / total;
  if (b.quadrature == RayBundleSpec::Quadrature::monte_carlo) {
    e.standard_error = std::sqrt(e.flux * (1.0 - e.flux) / static_cast<double>(rays.size()));
  }
  return e;
}

double moire_flux(const GeometrySpec& g, const RayBundleSpec& b, const ApertureSpec& slit) {
  return moire_flux_estimate(g, b, slit).flux;
}

std::vector<std::vector<double>> moire_flux_table(const GeometrySpec& g, const RayBundleSpec& b,
                                                  std::span<const double> shifts,
                                                  std::span<const double> centers, double slit_width) {
  if (!(slit_width > 0.0)) throw DomainError("detector slit width must be positive");
  const auto rays = trace_rays(g, b);
  const double total = total_weight(rays);

  // Rays clearing the fixed gratings (with their weight); only the middle grating moves.
  std::vector<std::pair<const Ray*, double>> candidates;
  for (const auto& r : rays) {
    const double w = r.weight * grating_weight(g, r, 0, g.gratings[0].lateral_shift) *
                     grating_weight(g, r, 2, g.gratings[2].lateral_shift);
    if (w > 0.0) candidates.emplace_back(&r, w);
  }
  std::vector<ApertureSpec> slits;
  for (double c : centers) slits.push_back(ApertureSpec{slit_width, c, g.z_detector()});
  std::vector<std::vector<double>> table(shifts.size(), std::vector<double>(centers.size(), 0.0));
  parallel_for(shifts.size(), [&](std::size_t s) {
    auto& row = table[s];
    for (const auto& [r, w0] : candidates) {
      const double w = w0 * grating_weight(g, *r, 1, shifts[s]);
      if (w == 0.0) continue;
      for (std::size_t p = 0; p < slits.size(); ++p) {
        const double d = slit_weight(slits[p], r->at_detector);
        if (d > 0.0) row[p] += w * d;
      }
    }
    for (double& v : row) v /= total;
  });
  return table;
}

FringeScan moire_scan(const GeometrySpec& g, const RayBundleSpec& b, std::span<const double> shifts,
                      const ApertureSpec& slit) {
  const double center = slit.center;
  const auto table = moire_flux_table(g, b, shifts, std::span<const double>(&center, 1), slit.width);
  FringeScan scan;
  scan.shifts.assign(shifts.begin(), shifts.end());
  for (const auto& row : table) scan.fluxes.push_back(row.front());
  scan.metadata.energy_ev = g.beam.kinetic_energy_ev();
  scan.metadata.detector_center = slit.center;
  scan.metadata.engine = Engine::classical;
  return scan;
}

}  // namespace emzi
