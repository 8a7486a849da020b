#pragma once

namespace afcsim::constants {

// CODATA 2018
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double boltzmann = 1.380649e-23;          // J/K
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double pi = 3.14159265358979323846;

inline constexpr double gauss = 1e-4;  // T
inline constexpr double fwhm_per_sigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

}  // namespace afcsim::constants
