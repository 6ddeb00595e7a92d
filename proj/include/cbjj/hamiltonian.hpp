#pragma once

#include "cbjj/circuit.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <vector>

namespace cbjj {

using cplx = std::complex<double>;
using SparseCd = Eigen::SparseMatrix<cplx>;

/// Coefficient set of the coupled junction-resonator Hamiltonian, SI rates.
/// lambda_scaled/mu_scaled/chi_scaled carry the operator scale factors
/// sqrt(hbar/(2 omega L_E)) resp. sqrt(hbar omega L_E / 2) so that they
/// multiply the dimensionless operators q_phi, (a+a+), i(a-a+). Signs are
/// kept as derived (lambda, mu negative at these parameters).
struct HamiltonianCoefficients {
    double omega = 0;          ///< mode frequency (rad/s)
    double eta = 0;            ///< cos(phi) a+a coefficient (rad/s)
    double kappa = 0;          ///< Kerr coefficient (rad/s)
    double lambda_scaled = 0;  ///< lambda * sqrt(hbar/(2 omega L_E)) (rad/s)
    double mu_scaled = 0;      ///< mu * sqrt(hbar omega L_E / 2) (rad/s)
    double chi_scaled = 0;     ///< chi * sqrt(hbar omega L_E / 2) (rad/s)
    double E_J = 0;            ///< Josephson energy (J)
    double M = 0;              ///< junction effective mass (hbar/2e)^2 (C_0 - C_c^2/C_E) (J s^2)
    double phi_J_hat = 0;      ///< static junction phase (rad)
    double I = 0;              ///< dimensionless bias
};

/// Same coefficients in internal units (rad/ns, hbar = 1).
struct ScaledCoefficients {
    double omega, eta, kappa, lambda_s, mu_s, chi_s;
    double ej;      ///< E_J / hbar in rad/ns
    double mass;    ///< M / hbar in ns
    double I;
    double phi_j;
};

ScaledCoefficients to_internal(const HamiltonianCoefficients& c);

/// Evaluate the Hamiltonian coefficient formulas for one solved mode.
HamiltonianCoefficients coefficients(const ModeSolution& mode, const DerivedCircuit& derived,
                                     double I);

/// Junction-phase-grid (x) Fock product discretization.  The grid excludes
/// the Dirichlet walls: phi_k = phi_min + (k+1) d_phi, k = 0..n_phi-1,
/// d_phi = (phi_max - phi_min)/(n_phi + 1).
struct ProductBasis {
    int n_phi = 512;
    int n_fock = 8;
    double phi_min = 0;
    double phi_max = 0;
    double d_phi = 0;

    ProductBasis() = default;
    ProductBasis(int n_phi_, int n_fock_, double phi_min_, double phi_max_);

    [[nodiscard]] int dim() const { return n_phi * n_fock; }
    [[nodiscard]] double phi(int k) const { return phi_min + (k + 1) * d_phi; }
    [[nodiscard]] std::vector<double> grid() const;
    /// index of the grid point closest to phi
    [[nodiscard]] int index_of(double phi_value) const;
    /// true if -E_J(cos phi + I phi) has exactly one local minimum inside
    [[nodiscard]] bool contains_single_well(double I) const;
};

/// Default box: length 2.5 pi, left edge at the uphill barrier maximum
/// (-pi - phi_J) minus a 0.25 pi margin, so the single well plus a downhill
/// outflow strip are covered.
ProductBasis make_default_basis(double phi_J_hat, int n_phi = 512, int n_fock = 8);

/// A sparse operator on the product basis (phi-major ordering:
/// index = i_phi * n_fock + k_fock).
struct OperatorMatrix {
    SparseCd mat;
    bool hermitian = false;

    [[nodiscard]] Eigen::Index dim() const { return mat.rows(); }
};

/// max |H - H^dag| / max |H|
double hermiticity_defect(const SparseCd& m);

/// Junction-sector operators on the phi grid (dimension n_phi), internal
/// units. kinetic = q_phi^2/(2 M); 4th-order central stencils, Dirichlet
/// walls. q_phi = -i d/dphi (hbar = 1).
struct JunctionOperators {
    SparseCd kinetic;
    SparseCd cos_phi;
    SparseCd phi;
    SparseCd q_phi;
};
JunctionOperators junction_operators(const ProductBasis& basis, double mass_internal);

/// Fock-sector operators (dimension n_fock), dimensionless, plus the SI
/// scales that multiply x and w to recover q = q_scale (a+a+) and
/// phi_field = phi_scale i(a-a+).
struct FieldOperators {
    Eigen::MatrixXcd a;
    Eigen::MatrixXcd n;
    Eigen::MatrixXcd x;      ///< a + a+
    Eigen::MatrixXcd w;      ///< i (a - a+)
    Eigen::MatrixXcd n2;     ///< a+ a+ a a
    Eigen::MatrixXcd w_sym;  ///< (n w + w n)/2
    double q_scale = 0;      ///< sqrt(hbar / (2 omega L_E)), C
    double phi_scale = 0;    ///< sqrt(hbar omega L_E / 2), Wb
};
FieldOperators field_operators(const ProductBasis& basis, const ModeSolution& mode);
FieldOperators field_operators(int n_fock); // dimensionless part only

/// Full Hamiltonian in internal units on the product basis.
OperatorMatrix assemble_hamiltonian(const ScaledCoefficients& coeffs, const ProductBasis& basis);

/// Only the resonator-involving terms (omega, eta, kappa, lambda, mu, chi);
/// the junction kinetic and washboard parts are left out.  This is the
/// mode-to-junction coupling block used by the single-mode validity check.
OperatorMatrix assemble_mode_coupling(const ScaledCoefficients& coeffs,
                                      const ProductBasis& basis);
inline OperatorMatrix assemble_hamiltonian(const HamiltonianCoefficients& coeffs,
                                           const ProductBasis& basis) {
    return assemble_hamiltonian(to_internal(coeffs), basis);
}

/// Cross-Kerr matrix kappa_ij over the given number of modes (rad/s).
/// kappa_ii reproduces the single-mode kappa times cos(phi_J).
Eigen::MatrixXd kerr_matrix(const DerivedCircuit& derived, double I, int n_modes);

/// Mean-field moments of the resonator state entering the effective
/// potential: nbar = <a+a>, n2 = <a+a+aa>, wbar = <i(a-a+)>.
struct FieldMoments {
    double n_mean = 0;
    double n2_mean = 0;
    double w_mean = 0;
};

/// Sampled effective potential for the phase particle (internal units):
/// U(phi) = omega nbar - ej [ cos(phi)(1 + eta nbar/ej + kappa n2/ej)
///                           + phi (I + (mu_s + chi_s nbar) wbar / ej) ]
std::vector<double> effective_potential(const ScaledCoefficients& coeffs,
                                        const FieldMoments& moments,
                                        const std::vector<double>& phi_grid);

/// Time-independent part of the external drive, internal units:
/// (alpha beta / hbar) (beta1 q_phi + beta2 (a+a+)).  The sin(omega_out t)
/// factor is applied by the propagator.
OperatorMatrix drive_operator(const ProductBasis& basis, double alpha, double beta,
                              double beta1, double beta2);

} // namespace cbjj
