#pragma once

namespace fwm::phys {

// CODATA 2018
inline constexpr double k_boltzmann = 1.380649e-23;     // J/K
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double speed_of_light = 2.99792458e8;  // m/s
inline constexpr double epsilon0 = 8.8541878128e-12;    // F/m

}  // namespace fwm::phys
