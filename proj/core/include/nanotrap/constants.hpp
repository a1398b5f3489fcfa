#pragma once

#include <numbers>

// CODATA 2018 values, SI units.
namespace nanotrap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double mu0 = 1.25663706212e-6;         // N/A^2
inline constexpr double epsilon0 = 8.8541878128e-12;    // F/m
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double boltzmann = 1.380649e-23;       // J/K
inline constexpr double electron_g_factor = 2.00231930436256;

inline constexpr double debye = 3.33564095198e-30;      // C m
// Atomic unit of electric polarizability, C m^2 / V.
inline constexpr double atomic_unit_polarizability = 1.64877727436e-41;

inline constexpr double nm = 1e-9;

}  // namespace nanotrap::constants
