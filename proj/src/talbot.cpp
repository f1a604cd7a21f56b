#include "emzi/talbot.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "emzi/constants.hpp"
#include "emzi/errors.hpp"
#include "emzi/fft.hpp"
#include "emzi/propagation.hpp"

namespace emzi {

namespace {

WaveField grating_exit(const GratingSpec& grating, double wavelength, std::size_t spp, std::size_t n_periods) {
  if (spp < 2 || n_periods < 1) throw DomainError("talbot: need >= 2 samples per period and >= 1 period");
  GratingSpec g = grating;
  g.n_periods_window = n_periods;
  g.validate();
  WaveField f = make_centered_field(spp * n_periods, g.period / static_cast<double>(spp), wavelength);
  for (std::size_t k = 0; k < f.size(); ++k) f.samples[k] = g.transmits(f.x(k)) ? 1.0 : 0.0;
  return f;
}

IntensityProfile intensity(const WaveField& f) {
  IntensityProfile p;
  p.x_min = f.x_min;
  p.dx = f.dx;
  p.values.resize(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) p.values[k] = std::norm(f.samples[k]);
  return p;
}

}  // namespace

IntensityProfile talbot_slice(const GratingSpec& grating, double wavelength, double z, std::size_t spp,
                              std::size_t n_periods) {
  const WaveField exit = grating_exit(grating, wavelength, spp, n_periods);
  return intensity(fresnel_propagate(exit, z, EdgeTreatment::periodic));
}

TalbotCarpet talbot_carpet(const GratingSpec& grating, double wavelength, double z_max, std::size_t n_planes,
                           std::size_t spp, std::size_t n_periods) {
  if (!(z_max > 0.0) || n_planes < 1) throw DomainError("talbot carpet: need z_max > 0 and at least one plane");
  const WaveField exit = grating_exit(grating, wavelength, spp, n_periods);
  TalbotCarpet c;
  c.period = grating.period;
  c.wavelength = wavelength;
  c.talbot_length = talbot_length(grating.period, wavelength);
  c.grating_intensity = intensity(exit);
  for (std::size_t j = 1; j <= n_planes; ++j) {
    const double z = z_max * static_cast<double>(j) / static_cast<double>(n_planes);
    c.z.push_back(z);
    c.slices.push_back(intensity(fresnel_propagate(exit, z, EdgeTreatment::periodic)));
  }
  return c;
}

double periodic_correlation(const IntensityProfile& a, const IntensityProfile& b, double shift) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) throw DomainError("correlation: profiles must have equal, non-zero length");
  const auto offset = static_cast<long>(std::lround(shift / a.dx));
  const auto nn = static_cast<long>(n);
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += a.values[k];
    mb += b.values[k];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (long k = 0; k < nn; ++k) {
    const long j = ((k - offset) % nn + nn) % nn;
    const double da = a.values[static_cast<std::size_t>(k)] - ma;
    const double db = b.values[static_cast<std::size_t>(j)] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double dominant_period(const IntensityProfile& p) {
  const std::size_t n = p.size();
  if (n < 2) throw DomainError("dominant_period: profile too short");
  std::vector<std::complex<double>> buf(p.values.begin(), p.values.end());
  Fft(n).forward(buf);
  std::size_t best = 1;
  for (std::size_t m = 1; m <= n / 2; ++m) {
    if (std::abs(buf[m]) > std::abs(buf[best]) * (1.0 + 1e-12)) best = m;
  }
  return p.dx * static_cast<double>(n) / static_cast<double>(best);
}

double pattern_contrast(const IntensityProfile& p) {
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  const double s = *hi + *lo;
  return s > 0.0 ? (*hi - *lo) / s : 0.0;
}

TalbotReport talbot_report(double grating_period, double wavelength, double spacing) {
  if (!(spacing > 0.0)) throw DomainError("talbot report: spacing must be positive");
  TalbotReport r;
  r.talbot_length = talbot_length(grating_period, wavelength);
  r.spacing = spacing;
  r.ratio = spacing / r.talbot_length;
  r.nearest_multiple = std::lround(r.ratio);
  r.mismatch = std::abs(r.ratio - static_cast<double>(r.nearest_multiple));
  return r;
}

}  // namespace emzi
