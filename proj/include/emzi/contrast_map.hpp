#pragma once

#include <span>
#include <vector>

#include "emzi/fringe.hpp"
#include "emzi/interferometer.hpp"
#include "emzi/moire.hpp"

namespace emzi {

struct ContrastPoint {
  double position = 0.0;   ///< detector-slit center [m]
  FringeFit fit;
  double mean_flux = 0.0;
  bool significant = false;  ///< mean flux >= min_relative_flux * the map's largest mean flux
};

struct ContrastMapOptions {
  PeriodBounds bounds{};
  double slit_width = 5e-6;
  /// Positions collecting less than this fraction of the map's peak mean flux are
  /// reported but excluded from maxima.
  double min_relative_flux = 0.1;
};

/// Fits one fringe per detector position from a flux table indexed [shift][position].
std::vector<ContrastPoint> contrast_map_from_table(std::span<const double> shifts, std::span<const double> positions,
                                                   const std::vector<std::vector<double>>& table,
                                                   const ContrastMapOptions& options, const ScanMetadata& metadata);

/// Quantum contrast versus detector-slit center: one middle-grating scan, fitted at
/// every position.
std::vector<ContrastPoint> contrast_vs_detector(const GeometrySpec& geometry, const CoherenceSpec& coherence,
                                                std::span<const double> positions, std::span<const double> shifts,
                                                const SamplingPlan& plan, const ContrastMapOptions& options);

/// Same from precomputed scan patterns.
std::vector<ContrastPoint> contrast_vs_detector(const ScanPatterns& patterns, std::span<const double> positions,
                                                const ContrastMapOptions& options, const ScanMetadata& metadata);

/// Classical Moire contrast versus detector-slit center.
std::vector<ContrastPoint> moire_contrast_map(const GeometrySpec& geometry, const RayBundleSpec& bundle,
                                              std::span<const double> positions, std::span<const double> shifts,
                                              const ContrastMapOptions& options);

struct RayConvergence {
  RayBundleSpec bundle;                  ///< the accepted sample counts
  std::vector<std::size_t> counts;       ///< per-slit sample counts evaluated, in order
  std::vector<double> max_contrast;      ///< significant-point maximum at each count
  std::vector<ContrastPoint> map;        ///< map at the accepted counts
  bool converged = false;
};

/// Doubles the deterministic-grid sample counts (n -> 2n - 1, keeping the old nodes)
/// until the maximum significant contrast changes by less than `tolerance` absolute,
/// or max_samples is exceeded.
RayConvergence converge_moire_contrast(const GeometrySpec& geometry, const RayBundleSpec& bundle,
                                       std::span<const double> positions, std::span<const double> shifts,
                                       const ContrastMapOptions& options, double tolerance = 1e-3,
                                       std::size_t max_samples = 4001);

/// Largest contrast among significant, converged points (0 if none).
double max_significant_contrast(const std::vector<ContrastPoint>& map);
/// Index of that point, or map.size() if none.
std::size_t argmax_significant_contrast(const std::vector<ContrastPoint>& map);

/// Detector centers from start to stop inclusive.
std::vector<double> position_range(double start, double stop, double step);

}  // namespace emzi
