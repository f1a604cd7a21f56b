#pragma once

// CODATA 2018 (h, c, e exact by SI definition).
namespace emzi::constants {

inline constexpr double planck = 6.62607015e-34;         // J s
inline constexpr double speed_of_light = 299792458.0;    // m / s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double electron_mass = 9.1093837015e-31;     // kg
inline constexpr double pi = 3.14159265358979323846;

inline constexpr double electron_rest_energy = electron_mass * speed_of_light * speed_of_light;  // J

}  // namespace emzi::constants

namespace emzi {

/// Kinetic energy in joules from electron-volts.
constexpr double electron_volts(double ev) { return ev * constants::elementary_charge; }
constexpr double to_electron_volts(double joules) { return joules / constants::elementary_charge; }

}  // namespace emzi
