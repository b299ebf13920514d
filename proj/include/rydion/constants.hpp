#pragma once

#include <numbers>

namespace rydion {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018 values, SI.
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double hbar = 1.054571817e-34;                // J s

// 40Ca+ : atomic mass of 40Ca minus one electron mass, in u.
inline constexpr double ca40_ion_mass_u = 39.96204228;
inline constexpr double ca40_ion_mass_kg = ca40_ion_mass_u * atomic_mass_unit;

// I/O boundary units. Internally everything is rad/s, s, kg, C, V/m^2.
inline constexpr double mhz = two_pi * 1e6;  // linear MHz -> rad/s
inline constexpr double khz = two_pi * 1e3;
inline constexpr double us = 1e-6;           // microseconds -> s
inline constexpr double pol_e30 = 1e-30;     // polarizability I/O unit, C m^2 / V

}  // namespace rydion
