#pragma once

// Physical constants (CODATA 2018) and the internal unit system.
//
// All module-internal energies and rates are expressed in angular GHz
// (rad/ns), with hbar = 1.  Time is in ns, the junction phase is
// dimensionless and flux is measured in units of hbar/2e.  Public structs
// that mirror device data sheets (CircuitParams, HamiltonianCoefficients)
// stay in SI; conversion happens where matrices are assembled.

namespace cbjj {

inline constexpr double hbar_SI = 1.054571817e-34;   // J s
inline constexpr double e_charge_SI = 1.602176634e-19; // C
inline constexpr double two_e_SI = 2.0 * e_charge_SI;
inline constexpr double pi = 3.14159265358979323846;

// 1 internal energy/rate unit = 1 rad/ns = 1e9 rad/s.
inline constexpr double rad_per_ns = 1.0e9; // rad/s

/// rad/s -> rad/ns
inline constexpr double to_internal_rate(double omega_si) { return omega_si / rad_per_ns; }
/// rad/ns -> rad/s
inline constexpr double to_si_rate(double omega_int) { return omega_int * rad_per_ns; }
/// J -> rad/ns
inline constexpr double energy_to_internal(double e_si) { return e_si / (hbar_SI * rad_per_ns); }
/// junction mass (J s^2) -> internal mass (ns)
inline constexpr double mass_to_internal(double m_si) { return m_si / hbar_SI * rad_per_ns; }
/// rad/ns -> non-angular GHz (the unit used in output files)
inline constexpr double to_ghz(double omega_int) { return omega_int / (2.0 * pi); }
inline constexpr double from_ghz(double f_ghz) { return f_ghz * 2.0 * pi; }

} // namespace cbjj
