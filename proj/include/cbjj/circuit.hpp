#pragma once

#include <stdexcept>

namespace cbjj {

/// Raw device parameters, SI units throughout.
struct CircuitParams {
    double I_c = 2.0e-6;        ///< junction critical current (A)
    double C_J = 1500.0e-15;    ///< junction capacitance (F)
    double Z_0 = 50.0;          ///< resonator line impedance (Ohm)
    double omega_bare = 0.0;    ///< bare lambda/4 resonance (rad/s)
    double R_J = 300.0;         ///< junction resistance (Ohm)
    double C_out = 5.0e-15;     ///< output coupling capacitance (F)
    double Z_out = 50.0;        ///< external line impedance (Ohm)

    void validate() const;
};

/// Quantities derived once per circuit.  Only the products L_T*d and C_T*d
/// ever enter the mode equation, so the line is stored as totals.
struct DerivedCircuit {
    double E_J = 0;         ///< Josephson energy (J)
    double L_J = 0;         ///< Josephson inductance (H)
    double L_T_total = 0;   ///< line inductance L_T*d (H)
    double C_T_total = 0;   ///< line capacitance C_T*d (F)
    double C_J = 0;         ///< junction capacitance, carried along (F)
    double M_bare = 0;      ///< bare junction mass C_J*(hbar/2e)^2 (J s^2)
};

/// One resonator mode at a given bias.
struct ModeSolution {
    int mode_index = 0;
    double kd = 0;          ///< dimensionless wavenumber * length
    double phi_J_hat = 0;   ///< static junction phase arcsin(I) (rad)
    double C_E = 0;         ///< F
    double C_0 = 0;         ///< F
    double C_c = 0;         ///< F
    double L_E = 0;         ///< H
    double omega = 0;       ///< mode angular frequency (rad/s)
};

/// Invert (Z_0, omega_bare) into line totals and evaluate junction scales.
DerivedCircuit derive_circuit(const CircuitParams& params);

/// Static junction phase arcsin(I).  Throws for I >= 1 (no static solution)
/// or I < 0.
double junction_phase(double I);

/// Solve kd*tan(kd) = (L_T d / L_J) cos(phi_J) on branch (j*pi, j*pi + pi/2).
/// Bracketed bisection refined by Newton steps; residual < 1e-12*(1+r).
double solve_wavenumber(const DerivedCircuit& derived, double I, int mode_index);

/// Closed-form approximation kd = pi(1+2j) / (2(1 + L_J/(L_T d cos phi_J))),
/// valid for L_J << L_T d cos(phi_J).
double approx_wavenumber(const DerivedCircuit& derived, double I, int mode_index);

/// Populate the lumped constants C_E, C_0, C_c, L_E and the mode frequency
/// for a solved wavenumber.
ModeSolution lumped_constants(const DerivedCircuit& derived, double I, double kd,
                              int mode_index = 0);

/// Convenience: solve mode j at bias I and build its lumped constants.
ModeSolution solve_mode(const DerivedCircuit& derived, double I, int mode_index = 0);

} // namespace cbjj
