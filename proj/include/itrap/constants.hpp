#pragma once

#include <numbers>

namespace itrap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double elementary_charge = 1.602176634e-19;     // C (exact)
inline constexpr double epsilon0 = 8.8541878128e-12;             // F/m
inline constexpr double coulomb_k = 1.0 / (4.0 * pi * epsilon0);  // N m^2 / C^2
inline constexpr double atomic_mass = 1.66053906660e-27;          // kg
inline constexpr double euler_gamma = std::numbers::egamma;

/// Joules to milli-electronvolts.
constexpr double to_meV(double joules) { return joules / elementary_charge * 1e3; }
constexpr double from_meV(double mev) { return mev * 1e-3 * elementary_charge; }

}  // namespace itrap::constants
