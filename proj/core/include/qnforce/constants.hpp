#pragma once

namespace qnforce::constants {

// Physical constants pinned for bit-reproducible output.
inline constexpr double hbar = 1.054571817e-34;        // J*s
inline constexpr double eps0 = 8.8541878128e-12;       // F/m
inline constexpr double mu0 = 1.25663706212e-6;        // H/m
inline constexpr double G_newton = 6.67430e-11;        // m^3/(kg*s^2)
inline constexpr double planck_mass = 2.176e-8;        // kg (~21.76 ug)

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace qnforce::constants
