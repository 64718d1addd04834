#pragma once

#include <numbers>

namespace modecouple::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

/// Hz -> rad/s
constexpr double angular(double hz) { return two_pi * hz; }

}  // namespace modecouple::constants
