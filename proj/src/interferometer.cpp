#include "emzi/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "emzi/constants.hpp"
#include "emzi/errors.hpp"
#include "emzi/parallel.hpp"

namespace emzi {

using constants::pi;

void CoherenceSpec::validate() const {
  if (n_source_points < 1) throw DomainError("coherence: need at least one source point");
  if (n_energy_samples < 1) throw DomainError("coherence: need at least one energy sample");
  if (!(convergence_tol > 0.0)) throw DomainError("coherence: convergence tolerance must be positive");
}

std::vector<IncoherentSample> incoherent_samples(const GeometrySpec& g, const CoherenceSpec& c) {
  c.validate();
  std::vector<std::pair<double, double>> energies;  // (wavelength, weight)
  const double sigma = g.beam.energy_spread_sigma();
  if (c.n_energy_samples == 1 || sigma == 0.0) {
    energies.emplace_back(g.beam.wavelength(), 1.0);
  } else {
    double total = 0.0;
    for (std::size_t j = 0; j < c.n_energy_samples; ++j) {
      const double t = -3.0 + 6.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(c.n_energy_samples);
      const double e = g.beam.kinetic_energy() + t * sigma;
      if (e <= 0.0) continue;
      const double w = std::exp(-0.5 * t * t);
      energies.emplace_back(wavelength_from_energy(e), w);
      total += w;
    }
    for (auto& e : energies) e.second /= total;
  }
  std::vector<IncoherentSample> out;
  const auto ns = static_cast<double>(c.n_source_points);
  for (const auto& [lambda, we] : energies) {
    for (std::size_t i = 0; i < c.n_source_points; ++i) {
      const double xs = g.source.center + g.source.width * ((static_cast<double>(i) + 0.5) / ns - 0.5);
      out.push_back({xs, lambda, we / ns});
    }
  }
  return out;
}

WaveField collimator_exit_field(const GeometrySpec& g, double source_x, double wavelength, const SamplingPlan& plan) {
  WaveField f = plan.make_field(wavelength);
  const double lambda_d = wavelength * g.distances.source_to_collimator;
  std::size_t open = 0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double x = f.x(k);
    if (!g.collimator.transmits(x)) continue;
    const double u = x - source_x;
    f.samples[k] = std::polar(1.0, pi * u * u / lambda_d);
    ++open;
  }
  if (open == 0) throw NumericError("collimator slit is narrower than the grid spacing");
  const double norm = 1.0 / std::sqrt(static_cast<double>(open) * f.dx);
  for (auto& s : f.samples) s *= norm;
  return f;
}

namespace {

// Precomputed transfer functions and masks for one geometry on one grid.
class Beamline {
 public:
  Beamline(const GeometrySpec& g, const SamplingPlan& plan) : g_(g), plan_(plan) {
    g.validate();
    plan.require_certified();
    const WaveField grid = plan.make_field(g.beam.wavelength());
    for (std::size_t i = 0; i < 3; ++i) {
      if (g.grating_inserted[i]) masks_[i] = transmission(g.gratings[i], grid);
    }
  }

  // Collimator exit -> G1 mask -> field arriving at the middle grating.
  WaveField to_middle_grating(const IncoherentSample& s) {
    WaveField f = collimator_exit_field(g_, s.source_x, s.wavelength, plan_);
    const auto& p = propagators(s.wavelength);
    p[0].apply(f.samples);
    apply(f, 0);
    p[1].apply(f.samples);
    return f;
  }

  // Middle-grating mask for the given shift -> G3 -> detector; returns |psi|^2.
  std::vector<double> to_detector(WaveField f, const std::vector<double>* middle_mask) {
    if (middle_mask) {
      for (std::size_t k = 0; k < f.size(); ++k) f.samples[k] *= (*middle_mask)[k];
    }
    const auto& p = propagators(f.wavelength);
    p[2].apply(f.samples);
    apply(f, 2);
    p[3].apply(f.samples);
    std::vector<double> out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::norm(f.samples[k]);
    return out;
  }

  std::vector<double> middle_mask(double shift) const {
    GratingSpec g2 = g_.gratings[1];
    g2.lateral_shift = shift;
    return transmission(g2, plan_.make_field(g_.beam.wavelength()));
  }

  bool middle_inserted() const { return g_.grating_inserted[1]; }

  // Must be called for every wavelength before any parallel use.
  const std::array<FresnelPropagator, 4>& propagators(double lambda) {
    auto it = props_.find(lambda);
    if (it == props_.end()) {
      for (const auto& leg : plan_.legs) {
        if (lambda < leg.wavelength_min * (1 - 1e-12) || lambda > leg.wavelength_max * (1 + 1e-12)) {
          throw SamplingViolation(leg.name, "wavelength outside the range certified for leg " + leg.name);
        }
      }
      auto make = [&](std::size_t i) {
        return FresnelPropagator(plan_.n_samples, plan_.dx, lambda, plan_.legs[i].distance, EdgeTreatment::absorbing);
      };
      it = props_.emplace(lambda, std::array<FresnelPropagator, 4>{make(0), make(1), make(2), make(3)}).first;
    }
    return it->second;
  }

 private:
  void apply(WaveField& f, std::size_t i) const {
    if (masks_[i].empty()) return;
    for (std::size_t k = 0; k < f.size(); ++k) f.samples[k] *= masks_[i][k];
  }

  const GeometrySpec& g_;
  const SamplingPlan& plan_;
  std::array<std::vector<double>, 3> masks_;
  std::map<double, std::array<FresnelPropagator, 4>> props_;
};

IntensityProfile full_grid_profile(const SamplingPlan& plan, std::vector<double> values) {
  IntensityProfile p;
  p.dx = plan.dx;
  p.x_min = (0.5 - 0.5 * static_cast<double>(plan.n_samples)) * plan.dx;
  p.values = std::move(values);
  return p;
}

}  // namespace

IntensityProfile propagate_point_source(const GeometrySpec& g, double source_x, double wavelength,
                                        const SamplingPlan& plan) {
  if (!g.source.transmits(source_x) && source_x != g.source.upper()) {
    throw DomainError("point source lies outside the source slit");
  }
  Beamline line(g, plan);
  WaveField f = line.to_middle_grating({source_x, wavelength, 1.0});
  const std::vector<double> mask = line.middle_inserted() ? line.middle_mask(g.gratings[1].lateral_shift) : std::vector<double>{};
  return full_grid_profile(plan, line.to_detector(std::move(f), mask.empty() ? nullptr : &mask));
}

IntensityProfile detector_pattern(const GeometrySpec& g, const CoherenceSpec& c, const SamplingPlan& plan) {
  const double shift = g.gratings[1].lateral_shift;
  ScanPatterns sp = middle_grating_patterns(g, c, std::span<const double>(&shift, 1), plan,
                                            plan.grid_half_width());
  IntensityProfile p = std::move(sp.patterns.front());
  const double total = p.total();
  if (!(total > 0.0)) throw NumericError("detector pattern carries no flux");
  for (double& v : p.values) v /= total;
  return p;
}

IntensityProfile detector_pattern(const GeometrySpec& g, const CoherenceSpec& c) {
  return detector_pattern(g, c, plan_sampling(g));
}

double detector_flux(const IntensityProfile& profile, const ApertureSpec& slit) {
  return profile.integrate(slit.lower(), slit.upper());
}

ScanPatterns middle_grating_patterns(const GeometrySpec& g, const CoherenceSpec& c, std::span<const double> shifts,
                                     const SamplingPlan& plan, double crop_half_width) {
  Beamline line(g, plan);
  const auto samples = incoherent_samples(g, c);
  for (const auto& s : samples) line.propagators(s.wavelength);

  std::vector<WaveField> upstream(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { upstream[i] = line.to_middle_grating(samples[i]); });

  ScanPatterns out;
  out.shifts.assign(shifts.begin(), shifts.end());
  out.patterns.resize(shifts.size());
  parallel_for(shifts.size(), [&](std::size_t j) {
    const std::vector<double> mask = line.middle_inserted() ? line.middle_mask(shifts[j]) : std::vector<double>{};
    std::vector<double> sum(plan.n_samples, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto intensity = line.to_detector(upstream[i], mask.empty() ? nullptr : &mask);
      const double w = samples[i].weight;
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += w * intensity[k];
    }
    out.patterns[j] = full_grid_profile(plan, std::move(sum)).cropped(-crop_half_width, crop_half_width);
  });
  return out;
}

FringeScan scan_middle_grating(const GeometrySpec& g, const CoherenceSpec& c, std::span<const double> shifts,
                               const ApertureSpec& detector_slit, const SamplingPlan& plan) {
  const double half = std::max(std::abs(detector_slit.lower()), std::abs(detector_slit.upper())) + 2.0 * plan.dx;
  const auto sp = middle_grating_patterns(g, c, shifts, plan, std::min(half, plan.grid_half_width()));
  FringeScan scan;
  scan.shifts = sp.shifts;
  for (const auto& p : sp.patterns) scan.fluxes.push_back(detector_flux(p, detector_slit));
  scan.metadata.energy_ev = g.beam.kinetic_energy_ev();
  scan.metadata.detector_center = detector_slit.center;
  scan.metadata.engine = Engine::quantum;
  return scan;
}

CoherenceConvergence converge_source_points(const GeometrySpec& g, const CoherenceSpec& c,
                                            std::span<const ApertureSpec> slits, const SamplingPlan& plan) {
  CoherenceConvergence r;
  CoherenceSpec trial = c;
  const double shift = g.gratings[1].lateral_shift;
  std::vector<double> previous;
  for (;;) {
    const auto sp = middle_grating_patterns(g, trial, std::span<const double>(&shift, 1), plan,
                                            plan.detector_half_width);
    std::vector<double> fluxes;
    for (const auto& s : slits) fluxes.push_back(detector_flux(sp.patterns.front(), s));
    r.counts.push_back(trial.n_source_points);
    double change = 0.0;
    if (!previous.empty()) {
      const double scale = *std::max_element(fluxes.begin(), fluxes.end());
      for (std::size_t i = 0; i < fluxes.size(); ++i) change = std::max(change, std::abs(fluxes[i] - previous[i]));
      change = scale > 0.0 ? change / scale : change;
    }
    r.max_relative_change.push_back(change);
    if (!previous.empty() && change < trial.convergence_tol) {
      // The previous count already agreed with this one to tolerance.
      r.converged = true;
      r.coherence = trial;
      r.coherence.n_source_points = trial.n_source_points / 2;
      return r;
    }
    if (trial.n_source_points * 2 > trial.max_source_points) {
      r.coherence = trial;
      return r;
    }
    previous = std::move(fluxes);
    trial.n_source_points *= 2;
  }
}

}  // namespace emzi
