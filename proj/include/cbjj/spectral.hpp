#pragma once

#include "cbjj/hamiltonian.hpp"

#include <optional>

namespace cbjj {

struct EigenPair {
    double energy = 0;            ///< internal units (rad/ns)
    Eigen::VectorXcd state;       ///< normalized, product-basis amplitudes
    double mean_photon = 0;
    bool bound = false;
    // classification diagnostics
    double in_well_weight = 0;
    double barrier_top = 0;       ///< dressed barrier top (rad/ns)
    FieldMoments moments;
};

struct EigensolveOptions {
    int max_lanczos = 0;          ///< 0: auto (scales with n_states)
    double residual_tol = 1e-8;   ///< times ||H||_inf
    int dense_threshold = 1024;   ///< solve densely at or below this dimension
    std::optional<double> sigma;  ///< shift override (rad/ns)
};

/// Lowest n_states eigenpairs of a Hermitian operator on the product basis.
/// Shift-invert Lanczos with full reorthogonalization; dense fallback below
/// dimension 4096 when the iteration stalls.  Throws on non-convergence.
std::vector<EigenPair> eigensolve(const OperatorMatrix& H, int n_states,
                                  const ProductBasis& basis,
                                  const EigensolveOptions& opts = {});

/// Phase marginal P(phi_k) of a product-basis state; sums to norm^2 * d_phi^-1
/// convention: sum_k P(phi_k) d_phi = norm^2.
std::vector<double> phase_distribution(const Eigen::VectorXcd& state, const ProductBasis& basis);

/// Field moments (nbar, <a+a+aa>, <i(a-a+)>) of a product-basis state.
FieldMoments field_moments(const Eigen::VectorXcd& state, const ProductBasis& basis);

/// Dressed-barrier bound-state test: >= 90% of the phase marginal left of
/// the barrier maximum of the state's own effective potential, and energy
/// below that barrier top.  Fills bound flags and diagnostics in place.
void classify_bound(std::vector<EigenPair>& pairs, const ScaledCoefficients& coeffs,
                    const ProductBasis& basis, double weight_threshold = 0.90);

struct CouplingResult {
    double alpha = 0;      ///< C_out sqrt(hbar omega_out^2 Z_out / 2) (J)
    double beta1 = 0;      ///< weight of q_phi (V)
    double beta2 = 0;      ///< weight of (a+a+) (V)
    double Omega = 0;      ///< |coupling| / hbar (rad/s)
    double omega_out = 0;  ///< drive frequency used (rad/s)
    cplx me_q{0, 0};       ///< <0|q_phi|1>
    cplx me_x{0, 0};       ///< <0|a+a+|1>
};

/// Drive weights alpha, beta1, beta2 for a given drive frequency (no matrix
/// elements; Omega left zero).
CouplingResult coupling_weights(const ModeSolution& mode, const CircuitParams& params,
                                double omega_out_si);

/// External coupling through C_out between the two lowest bound states.
/// omega_out defaults to the level splitting (E1-E0)/hbar.  Throws if fewer
/// than two bound states are present.
CouplingResult external_coupling(const ModeSolution& mode, const CircuitParams& params,
                                 const std::vector<EigenPair>& pairs, const ProductBasis& basis,
                                 std::optional<double> omega_out_si = {});

struct ValidityResult {
    double ratio_1a1b = 0;      ///< |g_{1a,1b} / Delta_{1a,1b}|
    double ratio_01b = 0;       ///< |g_{0,1b} / Delta_{0,1b}|
    double est_population = 0;  ///< (g_{1a,1b}/Delta_{1a,1b})^2
    double g_1a1b = 0;          ///< rad/ns
    double g_01b = 0;           ///< rad/ns
    double delta_1a1b = 0;      ///< rad/ns
    double delta_01b = 0;       ///< rad/ns
    double omega_b = 0;         ///< second-mode frequency (rad/s)
};

/// Single-mode validity estimate: couple the junction to resonator mode 1
/// ("mode b") and evaluate the product-ansatz matrix elements
/// g = <Psi~_1|H_{b,JJ}|Psi_1> against the energy differences.  The direct
/// mode-a/mode-b term is omitted (no closed form is available for it).
ValidityResult single_mode_validity(const DerivedCircuit& derived, double I,
                                    const ProductBasis& basis, int n_states = 96);

} // namespace cbjj
