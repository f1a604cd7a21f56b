#include "emzi/wave_field.hpp"

#include <cmath>
#include <stdexcept>

#include "emzi/errors.hpp"

namespace emzi {

double WaveField::total_probability() const {
  double sum = 0.0;
  for (const auto& s : samples) sum += std::norm(s);
  return sum * dx;
}

WaveField make_centered_field(std::size_t n, double dx, double wavelength) {
  if (n == 0) throw DomainError("wave field needs at least one sample");
  if (!(dx > 0.0)) throw DomainError("grid spacing must be positive");
  WaveField f;
  f.samples.assign(n, Complex{0.0, 0.0});
  f.dx = dx;
  f.x_min = (0.5 - 0.5 * static_cast<double>(n)) * dx;
  f.wavelength = wavelength;
  return f;
}

namespace {
template <class T>
double rel_l2(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}
}  // namespace

double relative_l2(const std::vector<Complex>& a, const std::vector<Complex>& b) { return rel_l2(a, b); }
double relative_l2(const std::vector<double>& a, const std::vector<double>& b) { return rel_l2(a, b); }

}  // namespace emzi
