#include "emzi/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emzi/constants.hpp"
#include "emzi/errors.hpp"
#include "emzi/fft.hpp"

namespace emzi {

using constants::pi;

namespace {

std::vector<double> taper_weights(std::size_t n, double fraction) {
  std::vector<double> w(n, 1.0);
  const double half = 0.5 * static_cast<double>(n);
  const double inner = (1.0 - fraction) * half;
  const double band = fraction * half;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = std::abs(static_cast<double>(k) + 0.5 - half);  // in units of dx
    if (r > inner) {
      const double c = std::cos(0.5 * pi * std::min(1.0, (r - inner) / band));
      w[k] = c * c;
    }
  }
  return w;
}

double spatial_frequency(std::size_t k, std::size_t n, double dx) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return (k < (n + 1) / 2 ? kk : kk - nn) / (nn * dx);
}

}  // namespace

void apply_edge_taper(WaveField& field, double fraction) {
  const auto w = taper_weights(field.size(), fraction);
  for (std::size_t k = 0; k < field.size(); ++k) field.samples[k] *= w[k];
}

FresnelPropagator::FresnelPropagator(std::size_t n, double dx, double wavelength, double distance,
                                     EdgeTreatment edges)
    : distance_(distance), wavelength_(wavelength) {
  if (!(distance > 0.0)) throw DomainError("propagation distance must be positive");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
  if (!(dx > 0.0) || n == 0) throw DomainError("invalid propagation grid");
  transfer_.resize(n);
  const double scale = 1.0 / static_cast<double>(n);  // folds in the inverse-FFT normalization
  for (std::size_t k = 0; k < n; ++k) {
    const double f = spatial_frequency(k, n, dx);
    transfer_[k] = std::polar(scale, -pi * wavelength * distance * f * f);
  }
  if (edges == EdgeTreatment::absorbing) taper_ = taper_weights(n, kTaperFraction);
}

void FresnelPropagator::apply(std::span<Complex> samples) const {
  const Fft fft(transfer_.size());
  if (!taper_.empty()) {
    for (std::size_t k = 0; k < samples.size(); ++k) samples[k] *= taper_[k];
  }
  fft.forward(samples);
  for (std::size_t k = 0; k < samples.size(); ++k) samples[k] *= transfer_[k];
  fft.inverse(samples);
}

WaveField fresnel_propagate(const WaveField& field, double distance, EdgeTreatment edges) {
  const FresnelPropagator prop(field.size(), field.dx, field.wavelength, distance, edges);
  WaveField out = field;
  prop.apply(out.samples);
  return out;
}

WaveField fresnel_propagate_direct(const WaveField& field, double distance) {
  if (!(distance > 0.0)) throw DomainError("propagation distance must be positive");
  const std::size_t n = field.size();
  const double lambda_l = field.wavelength * distance;
  // Kernel (i lambda L)^(-1/2) exp(i pi s^2 / (lambda L)) times the quadrature weight dx,
  // tabulated for every grid separation s = m dx, m in (-n, n).
  const Complex prefactor = std::polar(field.dx / std::sqrt(lambda_l), -0.25 * pi);
  std::vector<Complex> kernel(2 * n - 1);
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const double s = (static_cast<double>(i) - static_cast<double>(n - 1)) * field.dx;
    kernel[i] = prefactor * std::polar(1.0, pi * s * s / lambda_l);
  }
  WaveField out = field;
  std::fill(out.samples.begin(), out.samples.end(), Complex{});
  for (std::size_t k = 0; k < n; ++k) {
    const Complex src = field.samples[k];
    if (src == Complex{}) continue;
    // out[j] += kernel[j - k + n - 1] * src
    const Complex* kk = kernel.data() + (n - 1 - k);
    for (std::size_t j = 0; j < n; ++j) out.samples[j] += kk[j] * src;
  }
  return out;
}

std::vector<double> transmission(const GratingSpec& grating, const WaveField& field) {
  std::vector<double> t(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) t[k] = grating.transmits(field.x(k)) ? 1.0 : 0.0;
  return t;
}

std::vector<double> transmission(const ApertureSpec& aperture, const WaveField& field) {
  std::vector<double> t(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) t[k] = aperture.transmits(field.x(k)) ? 1.0 : 0.0;
  return t;
}

WaveField apply_mask(WaveField field, const GratingSpec& grating) {
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (!grating.transmits(field.x(k))) field.samples[k] = Complex{};
  }
  return field;
}

WaveField apply_mask(WaveField field, const ApertureSpec& aperture) {
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (!aperture.transmits(field.x(k))) field.samples[k] = Complex{};
  }
  return field;
}

// --- sampling plan ---------------------------------------------------------

std::pair<double, double> wavelength_range(const BeamSpec& beam) {
  const double e = beam.kinetic_energy();
  const double s = beam.energy_spread_sigma();
  const double e_hi = e + 3.0 * s;
  const double e_lo = std::max(e - 3.0 * s, 1e-3 * e);
  return {wavelength_from_energy(e_hi), wavelength_from_energy(e_lo)};
}

bool SamplingPlan::certified() const noexcept {
  if (!resolves_grating) return false;
  return std::all_of(legs.begin(), legs.end(), [](const LegSampling& l) { return l.certified(); });
}

void SamplingPlan::require_certified() const {
  if (!resolves_grating) {
    std::ostringstream os;
    os << "grid spacing " << dx << " m gives fewer samples per grating period than required";
    throw SamplingViolation("grating", os.str());
  }
  for (const auto& leg : legs) {
    if (!leg.certified()) {
      std::ostringstream os;
      os << "leg " << leg.name << " is not certified (";
      if (!leg.nyquist_ok) os << "dx " << dx << " m exceeds Nyquist limit " << leg.nyquist_dx << " m";
      if (!leg.nyquist_ok && !leg.wrap_ok) os << "; ";
      if (!leg.wrap_ok) os << "reach " << leg.max_reach << " m exceeds wrap budget " << leg.wrap_budget << " m";
      os << ")";
      throw SamplingViolation(leg.name, os.str());
    }
  }
}

namespace {

double plane_half_width(const GeometrySpec& g, std::size_t grating_index) {
  const auto& gr = g.gratings[grating_index];
  if (g.grating_inserted[grating_index]) return gr.window_half_width();
  return required_window_half_width(g, grating_index);
}

void certify(LegSampling& leg, double dx, double grid_half_width) {
  const double span = leg.origin_half_width + leg.target_half_width;
  leg.nyquist_dx = leg.wavelength_min * leg.distance / (2.0 * span);
  leg.max_reach = leg.wavelength_max * leg.distance / (2.0 * dx);
  leg.wrap_budget = 2.0 * grid_half_width - span;
  leg.nyquist_ok = dx <= leg.nyquist_dx * (1.0 + 1e-12);
  leg.wrap_ok = leg.max_reach <= leg.wrap_budget &&
                leg.target_half_width <= (1.0 - kTaperFraction) * grid_half_width;
}

}  // namespace

SamplingPlan plan_sampling(const GeometrySpec& g, const SamplingOptions& opt) {
  g.validate();
  const auto [lambda_min, lambda_max] = wavelength_range(g.beam);
  const double period = g.gratings[0].period;

  SamplingPlan plan;
  plan.detector_half_width = std::max(opt.min_detector_half_width,
                                      2.5 * std::abs(g.order_offset_at_detector(1, 0)));
  const double collimator_half = std::max(std::abs(g.collimator.lower()), std::abs(g.collimator.upper()));
  const std::array<double, 5> half{collimator_half, plane_half_width(g, 0), plane_half_width(g, 1),
                                   plane_half_width(g, 2), plan.detector_half_width};
  const std::array<double, 4> dist{g.distances.collimator_to_grating1, g.distances.grating1_to_grating2,
                                   g.distances.grating2_to_grating3, g.distances.grating3_to_detector};
  const std::array<const char*, 4> names{"collimator->G1", "G1->G2", "G2->G3", "G3->detector"};

  for (std::size_t i = 0; i < 4; ++i) {
    LegSampling leg;
    leg.name = names[i];
    leg.distance = dist[i];
    leg.wavelength_min = lambda_min;
    leg.wavelength_max = lambda_max;
    leg.origin_half_width = half[i];
    leg.target_half_width = half[i + 1];
    plan.legs.push_back(leg);
  }

  if (opt.dx) {
    plan.dx = *opt.dx;
  } else {
    double limit = opt.max_dx;
    for (const auto& leg : plan.legs) {
      limit = std::min(limit, leg.wavelength_min * leg.distance / (2.0 * (leg.origin_half_width + leg.target_half_width)));
    }
    limit = std::min(limit, period / opt.min_samples_per_period);
    // Largest spacing below the limit that divides the grating period into a whole
    // number of cells with the bar edge on a cell boundary too, so no sample sits on an edge.
    const double f = g.gratings[0].open_fraction;
    auto n = static_cast<std::size_t>(std::ceil(period / limit - 1e-9));
    for (std::size_t m = n; m < 64 * n; ++m) {
      const double edge = f * static_cast<double>(m);
      if (std::abs(edge - std::round(edge)) < 1e-9) {
        n = m;
        break;
      }
    }
    plan.dx = period / static_cast<double>(n);
  }
  if (!(plan.dx > 0.0)) throw DomainError("grid spacing must be positive");
  plan.resolves_grating = period / plan.dx >= opt.min_samples_per_period * (1.0 - 1e-9);

  if (opt.n_samples) {
    plan.n_samples = *opt.n_samples;
  } else {
    std::size_t n = opt.min_samples;
    auto fits = [&](std::size_t cand) {
      const double gh = 0.5 * plan.dx * static_cast<double>(cand);
      for (auto leg : plan.legs) {
        certify(leg, plan.dx, gh);
        if (!leg.wrap_ok) return false;
      }
      return true;
    };
    while (n < opt.max_samples && !fits(n)) n *= 2;
    plan.n_samples = n;
  }
  for (auto& leg : plan.legs) certify(leg, plan.dx, plan.grid_half_width());
  return plan;
}

WaveField fresnel_propagate(const WaveField& field, const SamplingPlan& plan, std::size_t leg_index,
                            EdgeTreatment edges) {
  const auto& leg = plan.legs.at(leg_index);
  if (!leg.certified()) {
    throw SamplingViolation(leg.name, "propagation refused: leg " + leg.name + " is not certified by the sampling plan");
  }
  if (field.size() != plan.n_samples || std::abs(field.dx - plan.dx) > 1e-15 * plan.dx) {
    throw SamplingViolation(leg.name, "propagation refused: field is not on the sampling plan grid");
  }
  if (field.wavelength < leg.wavelength_min * (1 - 1e-12) || field.wavelength > leg.wavelength_max * (1 + 1e-12)) {
    throw SamplingViolation(leg.name, "propagation refused: wavelength outside the certified range");
  }
  return fresnel_propagate(field, leg.distance, edges);
}

}  // namespace emzi
