#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace emzi {

enum class Engine { quantum, classical };

const char* to_string(Engine e) noexcept;

struct ScanMetadata {
  double energy_ev = 0.0;
  int port = 0;
  double detector_center = 0.0;
  Engine engine = Engine::quantum;
};

/// Detector flux versus middle-grating displacement.
struct FringeScan {
  std::vector<double> shifts;  ///< strictly monotone [m]
  std::vector<double> fluxes;  ///< non-negative
  ScanMetadata metadata;

  /// Throws DomainError on length mismatch, non-monotone shifts or negative flux.
  void validate() const;
};

/// Least-squares sinusoid I(x) = A + B cos(2 pi x / p + phi), contrast C = B / A.
struct FringeFit {
  double offset = 0.0;     ///< A
  double amplitude = 0.0;  ///< B >= 0
  double period = 0.0;     ///< p
  double phase = 0.0;      ///< phi in (-pi, pi]
  double contrast = 0.0;   ///< clamped to [0, 1]
  double residual_rms = 0.0;
  bool converged = false;
  bool phase_defined = true;  ///< false when the scan carries no oscillation
};

struct PeriodBounds {
  double lower = 25e-9;
  double upper = 200e-9;
};

struct FitOptions {
  double grid_step = 0.5e-9;  ///< coarse period search resolution
  double refine_tolerance = 1e-12;  ///< golden-section stopping width, relative to the period
};

/// Grid search over the period bounds with linear least squares on {1, cos, sin} at
/// each candidate, then golden-section refinement of the best bracket. Ties go to the
/// smaller residual, then the smaller period.
/// Requires >= 8 samples spanning >= 1.5 periods of the lower bound (NumericError otherwise).
FringeFit fit_fringes(const FringeScan& scan, PeriodBounds bounds, const FitOptions& options = {});

/// Sinusoid value of a fit at x.
double evaluate(const FringeFit& fit, double x);

struct LinearDrift {
  double total = 0.0;  ///< full extent of a uniform drift during the sweep [m]
};
struct GaussianJitter {
  double sigma = 0.0;  ///< rms position jitter [m]
};
using DriftModel = std::variant<LinearDrift, GaussianJitter>;

/// Amplitude reduction factor: sinc(pi total / p) for a linear drift,
/// exp(-2 pi^2 sigma^2 / p^2) for Gaussian jitter.
double drift_contrast_factor(const DriftModel& model, double period);

/// Scales the fitted oscillation of `scan` by the drift factor, keeping the fit residuals.
FringeScan apply_drift(const FringeScan& scan, const DriftModel& model, const FringeFit& ideal_fit);

/// Poisson counts with mean rate * dwell * flux / mean(flux) per sweep, summed over
/// `sweeps` independent sweeps. Seeded and reproducible.
FringeScan apply_poisson_noise(const FringeScan& scan, double rate, double dwell, std::uint64_t seed,
                               unsigned sweeps = 1);

/// Shifts from start to stop (inclusive when stop lies on the step lattice).
std::vector<double> shift_range(double start, double stop, double step);

}  // namespace emzi
