#include "emzi/intensity_profile.hpp"

#include <algorithm>
#include <cmath>

#include "emzi/errors.hpp"

namespace emzi {

namespace {
// Integral of the linear segment between samples k and k+1 over local coordinates [u0, u1] in [0, 1].
double segment(double y0, double y1, double u0, double u1, double dx) {
  const double slope = y1 - y0;
  const double f1 = y0 * u1 + 0.5 * slope * u1 * u1;
  const double f0 = y0 * u0 + 0.5 * slope * u0 * u0;
  return (f1 - f0) * dx;
}
}  // namespace

double IntensityProfile::integrate(double a, double b) const {
  if (values.size() < 2) throw DomainError("profile needs at least two samples to integrate");
  if (b < a) throw DomainError("integration bounds reversed");
  const double tol = 1e-9 * dx;
  if (a < x_min - tol || b > x_max() + tol) throw DomainError("integration window extends beyond the computed grid");
  a = std::max(a, x_min);
  b = std::min(b, x_max());
  if (b <= a) return 0.0;

  const double ua = (a - x_min) / dx;
  const double ub = (b - x_min) / dx;
  const auto last = values.size() - 2;
  const auto ka = std::min<std::size_t>(static_cast<std::size_t>(std::floor(ua)), last);
  const auto kb = std::min<std::size_t>(static_cast<std::size_t>(std::floor(ub)), last);

  if (ka == kb) return segment(values[ka], values[ka + 1], ua - ka, ub - ka, dx);
  double sum = segment(values[ka], values[ka + 1], ua - ka, 1.0, dx);
  for (std::size_t k = ka + 1; k < kb; ++k) sum += 0.5 * (values[k] + values[k + 1]) * dx;
  sum += segment(values[kb], values[kb + 1], 0.0, ub - kb, dx);
  return sum;
}

double IntensityProfile::total() const { return integrate(x_min, x_max()); }

double IntensityProfile::at(double x) const {
  if (values.empty()) return 0.0;
  const double u = (x - x_min) / dx;
  if (u < 0.0 || u > static_cast<double>(values.size() - 1)) return 0.0;
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(u), values.size() - 1);
  if (k + 1 >= values.size()) return values[k];
  const double t = u - k;
  return values[k] * (1.0 - t) + values[k + 1] * t;
}

IntensityProfile IntensityProfile::cropped(double a, double b) const {
  if (values.empty()) return *this;
  const double ua = std::max(0.0, std::floor((a - x_min) / dx));
  const double ub = std::min(static_cast<double>(values.size() - 1), std::ceil((b - x_min) / dx));
  if (ub < ua) throw DomainError("crop window lies outside the profile");
  IntensityProfile out;
  const auto k0 = static_cast<std::size_t>(ua);
  const auto k1 = static_cast<std::size_t>(ub);
  out.dx = dx;
  out.x_min = x(k0);
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(k0), values.begin() + static_cast<std::ptrdiff_t>(k1) + 1);
  return out;
}

}  // namespace emzi
