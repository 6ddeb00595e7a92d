#pragma once

#include "cbjj/constants.hpp"
#include "cbjj/hamiltonian.hpp"
#include "cbjj/spectral.hpp"

#include <functional>
#include <string>

namespace cbjj {

/// Complex absorbing potential beyond the classical turning point.
/// V_im(phi) = strength * ((phi - phi_t - margin)/(phi_edge - phi_t - margin))^power
/// for phi > phi_t + margin, zero elsewhere.
struct CapConfig {
    // Defaults calibrated on the I = 0.92 detection problem: the escape flux
    // crosses the absorber with ~0.3-1 x E_J/10 of kinetic energy, and both
    // weaker and stronger ramps reflect it noticeably.
    double strength_ghz = 45.0;   ///< peak |V_im|/h at the box edge (GHz, non-angular)
    double power = 2.0;
    double onset_margin = 0.20;   ///< rad beyond the turning point

    void validate() const {
        if (strength_ghz < 0) throw std::invalid_argument("cap strength must be >= 0");
        if (power < 1.0) throw std::invalid_argument("cap power must be >= 1");
    }
    [[nodiscard]] double strength_internal() const { return from_ghz(strength_ghz); }
};

struct FrictionConfig {
    enum class Model { off, momentum_damping };
    Model model = Model::off;
    double rate = 0.0; ///< 1/s

    void validate() const {
        if (rate < 0) throw std::invalid_argument("friction rate must be >= 0");
    }
};

/// Time series of a propagation run. Times in seconds, rates in 1/s;
/// norm_sq is ||Psi||^2 and p_switch = 1 - ||Psi||^2.
struct PropagationRecord {
    std::vector<double> times;
    std::vector<double> norm_sq;
    std::vector<double> mean_photon;
    std::vector<double> p_switch;
    std::vector<double> rate; ///< gamma = -d||Psi||^2/dt, central differences

    [[nodiscard]] size_t size() const { return times.size(); }
    [[nodiscard]] double p_at(double t_s) const; ///< linear interpolation
    [[nodiscard]] double final_p() const { return p_switch.empty() ? 0.0 : p_switch.back(); }
};

/// Outermost crossing U_eff(phi) = energy on the downhill slope of the
/// dressed barrier; returns the barrier position when the energy is above
/// the barrier top (or no barrier exists).
double turning_point(const std::vector<double>& u_eff, const std::vector<double>& grid,
                     double energy, double phi_well_hint);

/// Sampled V_im(phi) >= 0 in internal units (rad/ns).
std::vector<double> cap_profile(const CapConfig& cap, double phi_t,
                                const std::vector<double>& grid, double phi_edge);

/// External drive description, internal units: the Hermitian operator
/// c1 * q_phi (x) Id + c2 * Id (x) (a+a+), multiplied by sin(omega_out t).
struct DriveTerms {
    double c1 = 0;        ///< rad/ns
    double c2 = 0;        ///< rad/ns
    double omega_out = 0; ///< rad/ns
};

/// Assemble DriveTerms from a coupling result and drive amplitude beta.
DriveTerms make_drive(const CouplingResult& coupling, double beta);

struct PropagateOptions {
    double dt_ns = 5.0e-5;        ///< default 0.05 ps
    double record_stride_ns = 0.05;
    double energy_shift = 0.0;    ///< rad/ns; 0 -> use <psi0|H|psi0>
    bool freeze_moments = false;  ///< freeze field moments at zero (bare washboard CAP)
    std::function<void(double, const FieldMoments&)> monitor; ///< optional per-record hook
};

/// Propagate i dPsi/dt = (H + drive(t) - i V_im(t)) Psi with a Strang-split
/// Crank-Nicolson scheme: the kinetic/lambda/drive part is solved per
/// Fock-quadrature column (pentadiagonal CN, exactly unitary), the local
/// phi-blocks by precomputed 8x8 CN factors, and the absorbing potential by
/// an exact diagonal decay factor re-evaluated each step from the current
/// field moments.  Norm decay comes exclusively from V_im.
PropagationRecord propagate(const ScaledCoefficients& coeffs, const ProductBasis& basis,
                            const DriveTerms& drive, const CapConfig& cap,
                            const FrictionConfig& friction, const Eigen::VectorXcd& psi0,
                            double t_final_ns, const PropagateOptions& opts = {});

/// Ground-state-initialized detection run: solves the spectrum, prepares the
/// lowest bound state, resolves the drive (auto-resonant unless omega_out
/// is given) and propagates.  beta = 0 yields the dark-count record.
struct DetectionSetup {
    CircuitParams circuit;
    double I = 0.92;
    ProductBasis basis;
    CapConfig cap;
    FrictionConfig friction;
    double beta = 1.0;
    std::optional<double> omega_out_si; ///< rad/s; empty -> resonant with splitting
    double t_final_ns = 130.0;
    PropagateOptions prop;
    int n_states = 64;
};

struct DetectionResult {
    PropagationRecord record;
    CouplingResult coupling;
    double e0 = 0;   ///< ground (lowest bound) energy, rad/ns
    double e1 = 0;   ///< first excited bound energy, rad/ns
    ScaledCoefficients coeffs;
};

DetectionResult detection_run(const DetectionSetup& setup);

/// xi(t) = P_signal(t) - P_dark(t) on matching time grids.
struct EfficiencyCurve {
    std::vector<double> times;
    std::vector<double> xi;
    double xi_max = 0;
    double t_max = 0; ///< s
};
EfficiencyCurve efficiency(const PropagationRecord& signal, const PropagationRecord& dark);

/// t_r = pi / |Omega|; Omega in rad/s, result in seconds.
double rabi_time(double omega_rad_per_s);

} // namespace cbjj
