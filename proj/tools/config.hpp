#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emzi/beamline.hpp"
#include "emzi/contrast_map.hpp"
#include "emzi/interferometer.hpp"
#include "emzi/moire.hpp"
#include "emzi/propagation.hpp"

namespace sim {

/// Schema violation; `line` is 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what);
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

enum class EngineChoice { quantum, classical, both };

struct ScanBlock {
  double shift_start = 0.0;
  double shift_stop = 400e-9;
  double shift_step = 5e-9;
  int port = 1;
  double detector_offset = 0.0;
  double period_min = 25e-9;
  double period_max = 200e-9;
};

struct MapBlock {
  int port = 0;  ///< positions are measured from this port's center
  double start = -6e-6;
  double stop = 6e-6;
  double step = 1e-6;
  double min_relative_flux = 0.1;
};

struct ClassicalBlock {
  emzi::RayBundleSpec bundle{};
  double convergence_tol = 1e-3;
  std::size_t max_samples = 4001;
};

struct NoiseBlock {
  double count_rate = 0.0;  ///< 0 disables counting noise
  double dwell = 1.0;
  unsigned sweeps = 1;
  double drift = 0.0;  ///< extent used by both drift models; 0 disables
};

struct PatternBlock {
  double half_width = 60e-6;
};

struct TalbotBlock {
  double z_max = 0.0;  ///< 0 selects two Talbot lengths at the first energy
  std::size_t n_planes = 64;
  std::size_t samples_per_period = 64;
  std::size_t n_periods = 4;
};

/// Fully resolved run configuration (defaults applied, SI units).
struct RunConfig {
  emzi::ApparatusParameters apparatus{};
  std::vector<double> energies_ev{10e3};
  double energy_spread_ev = 0.0;
  std::optional<double> dx;
  std::optional<std::size_t> n_samples;
  EngineChoice engine = EngineChoice::both;
  emzi::CoherenceSpec coherence{};
  ClassicalBlock classical{};
  ScanBlock scan{};
  MapBlock map{};
  NoiseBlock noise{};
  PatternBlock pattern{};
  TalbotBlock talbot{};
  std::string output_directory = "out";
  bool write_svg = true;
  std::uint64_t seed = 1;

  emzi::GeometrySpec geometry(double energy_ev) const;
  emzi::SamplingOptions sampling_options() const;
};

/// Parses sectioned `key = value` text. Unknown sections or keys, missing or wrong
/// units, duplicates and out-of-range values throw ConfigError. An input with no
/// settings at all is rejected as well.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// The resolved config in the same syntax, every key present, values at 17
/// significant digits; parse_config(render_config(c)) reproduces c.
std::vector<std::string> render_config(const RunConfig& config);

}  // namespace sim
