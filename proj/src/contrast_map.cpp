#include "emzi/contrast_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emzi/errors.hpp"

namespace emzi {

std::vector<ContrastPoint> contrast_map_from_table(std::span<const double> shifts, std::span<const double> positions,
                                                   const std::vector<std::vector<double>>& table,
                                                   const ContrastMapOptions& options, const ScanMetadata& metadata) {
  if (table.size() != shifts.size()) throw DomainError("contrast map: table rows must match shifts");
  std::vector<ContrastPoint> map(positions.size());
  double peak = 0.0;
  for (std::size_t p = 0; p < positions.size(); ++p) {
    FringeScan scan;
    scan.shifts.assign(shifts.begin(), shifts.end());
    for (const auto& row : table) scan.fluxes.push_back(row.at(p));
    scan.metadata = metadata;
    scan.metadata.detector_center = positions[p];
    map[p].position = positions[p];
    map[p].mean_flux = std::accumulate(scan.fluxes.begin(), scan.fluxes.end(), 0.0) / static_cast<double>(scan.fluxes.size());
    map[p].fit = fit_fringes(scan, options.bounds);
    peak = std::max(peak, map[p].mean_flux);
  }
  for (auto& pt : map) pt.significant = peak > 0.0 && pt.mean_flux >= options.min_relative_flux * peak && pt.fit.converged;
  return map;
}

std::vector<ContrastPoint> contrast_vs_detector(const ScanPatterns& patterns, std::span<const double> positions,
                                                const ContrastMapOptions& options, const ScanMetadata& metadata) {
  std::vector<std::vector<double>> table(patterns.patterns.size(), std::vector<double>(positions.size()));
  for (std::size_t s = 0; s < patterns.patterns.size(); ++s) {
    for (std::size_t p = 0; p < positions.size(); ++p) {
      const ApertureSpec slit{options.slit_width, positions[p], 0.0};
      table[s][p] = detector_flux(patterns.patterns[s], slit);
    }
  }
  return contrast_map_from_table(patterns.shifts, positions, table, options, metadata);
}

std::vector<ContrastPoint> contrast_vs_detector(const GeometrySpec& g, const CoherenceSpec& c,
                                                std::span<const double> positions, std::span<const double> shifts,
                                                const SamplingPlan& plan, const ContrastMapOptions& options) {
  double reach = 0.0;
  for (double p : positions) reach = std::max(reach, std::abs(p) + 0.5 * options.slit_width);
  const auto patterns = middle_grating_patterns(g, c, shifts, plan, std::min(reach + 2.0 * plan.dx, plan.grid_half_width()));
  ScanMetadata meta;
  meta.energy_ev = g.beam.kinetic_energy_ev();
  meta.engine = Engine::quantum;
  return contrast_vs_detector(patterns, positions, options, meta);
}

std::vector<ContrastPoint> moire_contrast_map(const GeometrySpec& g, const RayBundleSpec& b,
                                              std::span<const double> positions, std::span<const double> shifts,
                                              const ContrastMapOptions& options) {
  const auto table = moire_flux_table(g, b, shifts, positions, options.slit_width);
  ScanMetadata meta;
  meta.energy_ev = g.beam.kinetic_energy_ev();
  meta.engine = Engine::classical;
  return contrast_map_from_table(shifts, positions, table, options, meta);
}

RayConvergence converge_moire_contrast(const GeometrySpec& g, const RayBundleSpec& bundle,
                                       std::span<const double> positions, std::span<const double> shifts,
                                       const ContrastMapOptions& options, double tolerance, std::size_t max_samples) {
  if (bundle.quadrature != RayBundleSpec::Quadrature::deterministic_grid) {
    throw DomainError("ray convergence applies to the deterministic grid only");
  }
  RayConvergence out;
  out.bundle = bundle;
  out.map = moire_contrast_map(g, out.bundle, positions, shifts, options);
  out.counts.push_back(out.bundle.n_source_samples);
  out.max_contrast.push_back(max_significant_contrast(out.map));
  while (true) {
    RayBundleSpec next = out.bundle;
    next.n_source_samples = 2 * next.n_source_samples - 1;
    next.n_collimator_samples = 2 * next.n_collimator_samples - 1;
    if (std::max(next.n_source_samples, next.n_collimator_samples) > max_samples) break;
    auto map = moire_contrast_map(g, next, positions, shifts, options);
    const double c = max_significant_contrast(map);
    const bool done = std::abs(c - out.max_contrast.back()) < tolerance;
    out.bundle = next;
    out.map = std::move(map);
    out.counts.push_back(next.n_source_samples);
    out.max_contrast.push_back(c);
    if (done) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::size_t argmax_significant_contrast(const std::vector<ContrastPoint>& map) {
  std::size_t best = map.size();
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map[i].significant) continue;
    if (best == map.size() || map[i].fit.contrast > map[best].fit.contrast) best = i;
  }
  return best;
}

double max_significant_contrast(const std::vector<ContrastPoint>& map) {
  const auto i = argmax_significant_contrast(map);
  return i < map.size() ? map[i].fit.contrast : 0.0;
}

std::vector<double> position_range(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw DomainError("position range: need step > 0 and stop >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
  return v;
}

}  // namespace emzi
