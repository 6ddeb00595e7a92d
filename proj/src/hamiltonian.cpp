#include "cbjj/hamiltonian.hpp"
#include "cbjj/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace cbjj {

ScaledCoefficients to_internal(const HamiltonianCoefficients& c) {
    ScaledCoefficients s;
    s.omega = to_internal_rate(c.omega);
    s.eta = to_internal_rate(c.eta);
    s.kappa = to_internal_rate(c.kappa);
    s.lambda_s = to_internal_rate(c.lambda_scaled);
    s.mu_s = to_internal_rate(c.mu_scaled);
    s.chi_s = to_internal_rate(c.chi_scaled);
    s.ej = energy_to_internal(c.E_J);
    s.mass = mass_to_internal(c.M);
    s.I = c.I;
    s.phi_j = c.phi_J_hat;
    return s;
}

HamiltonianCoefficients coefficients(const ModeSolution& mode, const DerivedCircuit& derived,
                                     double I) {
    HamiltonianCoefficients c;
    const double kd = mode.kd;
    const double ck = std::cos(kd);
    const double cj = std::cos(mode.phi_J_hat);
    const double le = mode.L_E;
    const double om = mode.omega;
    const double ej = derived.E_J;
    const double g = two_e_SI / hbar_SI; // 2e/hbar

    const double eta = 0.5 * ej * g * g * ck * ck * le * om;
    const double kappa = -0.25 * ej * g * g * g * g * hbar_SI * ck * ck * ck * ck * le * le * om * om;
    const double lambda = -g * mode.C_c / (mode.C_0 * mode.C_E - mode.C_c * mode.C_c);
    const double mu = -(ej / hbar_SI) * g * ck * cj;
    const double chi = 0.25 * (ej / hbar_SI) * g * g * g * hbar_SI * ck * ck * ck * le * om * cj;

    const double q_scale = std::sqrt(hbar_SI / (2.0 * om * le));
    const double phi_scale = std::sqrt(hbar_SI * om * le / 2.0);

    c.omega = om;
    c.eta = eta;
    c.kappa = kappa;
    c.lambda_scaled = lambda * q_scale;
    c.mu_scaled = mu * phi_scale;
    c.chi_scaled = chi * phi_scale;
    c.E_J = ej;
    c.M = (hbar_SI / two_e_SI) * (hbar_SI / two_e_SI) *
          (mode.C_0 - mode.C_c * mode.C_c / mode.C_E);
    c.phi_J_hat = mode.phi_J_hat;
    c.I = I;
    return c;
}

ProductBasis::ProductBasis(int n_phi_, int n_fock_, double phi_min_, double phi_max_)
    : n_phi(n_phi_), n_fock(n_fock_), phi_min(phi_min_), phi_max(phi_max_) {
    if (n_phi < 16) throw std::invalid_argument("ProductBasis: n_phi must be >= 16");
    if (n_fock < 1) throw std::invalid_argument("ProductBasis: n_fock must be >= 1");
    if (!(phi_max > phi_min)) throw std::invalid_argument("ProductBasis: empty phase box");
    d_phi = (phi_max - phi_min) / (n_phi + 1);
}

std::vector<double> ProductBasis::grid() const {
    std::vector<double> g(n_phi);
    for (int k = 0; k < n_phi; ++k) g[k] = phi(k);
    return g;
}

int ProductBasis::index_of(double phi_value) const {
    int k = static_cast<int>(std::lround((phi_value - phi_min) / d_phi)) - 1;
    if (k < 0) k = 0;
    if (k >= n_phi) k = n_phi - 1;
    return k;
}

bool ProductBasis::contains_single_well(double I) const {
    // Exactly one energetically relevant well: well minima sit at
    // phi = asin(I) + 2 pi n, barrier maxima at pi - asin(I) + 2 pi n. A well
    // whose bottom lies above the downhill barrier of the deepest well (the
    // uphill corner sliver the margin can expose) holds no relevant states.
    if (I < 0.0 || I >= 1.0) return false;
    const double p0 = std::asin(I);
    auto u = [&](double p) { return -(std::cos(p) + I * p); };

    std::vector<double> wells;
    for (int n = -8; n <= 8; ++n) {
        const double p = p0 + 2.0 * pi * n;
        if (p > phi_min && p < phi_max) wells.push_back(p);
    }
    if (wells.empty()) return false;
    double deepest = wells.front();
    for (double wp : wells)
        if (u(wp) < u(deepest)) deepest = wp;
    const double barrier = pi - p0 + 2.0 * pi * std::floor((deepest - (pi - p0)) / (2.0 * pi)) +
                           2.0 * pi;
    int relevant = 0;
    for (double wp : wells)
        if (u(wp) < u(barrier)) ++relevant;
    return relevant == 1;
}

ProductBasis make_default_basis(double phi_J_hat, int n_phi, int n_fock) {
    const double left_barrier = -pi - phi_J_hat;
    const double lo = left_barrier - 0.25 * pi;
    return ProductBasis(n_phi, n_fock, lo, lo + 2.5 * pi);
}

double hermiticity_defect(const SparseCd& m) {
    SparseCd diff = SparseCd(m.adjoint()) - m;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseCd::InnerIterator it(diff, k); it; ++it)
            num = std::max(num, std::abs(it.value()));
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseCd::InnerIterator it(m, k); it; ++it)
            den = std::max(den, std::abs(it.value()));
    return den > 0 ? num / den : 0.0;
}

namespace {

// 4th-order central stencils
constexpr double d2_stencil[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
constexpr double d1_stencil[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};

SparseCd banded_from_stencil(int n, const double* stencil, double scale, cplx factor) {
    SparseCd m(n, n);
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<size_t>(n) * 5);
    for (int i = 0; i < n; ++i)
        for (int off = -2; off <= 2; ++off) {
            const int j = i + off;
            if (j < 0 || j >= n) continue; // Dirichlet walls
            const double v = stencil[off + 2] * scale;
            if (v != 0.0) trips.emplace_back(i, j, factor * v);
        }
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SparseCd diagonal_matrix(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    SparseCd m(n, n);
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(values.size());
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, cplx(values[i], 0.0));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

} // namespace

JunctionOperators junction_operators(const ProductBasis& basis, double mass_internal) {
    JunctionOperators ops;
    const int n = basis.n_phi;
    const double h = basis.d_phi;
    // kinetic = -(1/2M) d^2/dphi^2
    ops.kinetic = banded_from_stencil(n, d2_stencil, 1.0 / (h * h),
                                      cplx(-1.0 / (2.0 * mass_internal), 0.0));
    // q_phi = -i d/dphi
    ops.q_phi = banded_from_stencil(n, d1_stencil, 1.0 / h, cplx(0.0, -1.0));

    std::vector<double> cosv(n), phiv(n);
    for (int k = 0; k < n; ++k) {
        phiv[k] = basis.phi(k);
        cosv[k] = std::cos(phiv[k]);
    }
    ops.cos_phi = diagonal_matrix(cosv);
    ops.phi = diagonal_matrix(phiv);
    return ops;
}

FieldOperators field_operators(int n_fock) {
    FieldOperators f;
    const int nf = n_fock;
    f.a = Eigen::MatrixXcd::Zero(nf, nf);
    for (int k = 1; k < nf; ++k) f.a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Eigen::MatrixXcd ad = f.a.adjoint();
    f.n = ad * f.a;
    f.x = f.a + ad;
    f.w = cplx(0.0, 1.0) * (f.a - ad);
    f.n2 = ad * ad * f.a * f.a;
    f.w_sym = 0.5 * (f.n * f.w + f.w * f.n);
    return f;
}

FieldOperators field_operators(const ProductBasis& basis, const ModeSolution& mode) {
    FieldOperators f = field_operators(basis.n_fock);
    f.q_scale = std::sqrt(hbar_SI / (2.0 * mode.omega * mode.L_E));
    f.phi_scale = std::sqrt(hbar_SI * mode.omega * mode.L_E / 2.0);
    return f;
}

namespace {

/// kron(junction, fock) into triplets, phi-major ordering
void add_kron(std::vector<Eigen::Triplet<cplx>>& trips, const SparseCd& jop,
              const Eigen::MatrixXcd& fop, int n_fock) {
    for (int kcol = 0; kcol < jop.outerSize(); ++kcol)
        for (SparseCd::InnerIterator it(jop, kcol); it; ++it)
            for (int fr = 0; fr < n_fock; ++fr)
                for (int fc = 0; fc < n_fock; ++fc) {
                    const cplx v = it.value() * fop(fr, fc);
                    if (v != cplx(0.0, 0.0))
                        trips.emplace_back(static_cast<int>(it.row()) * n_fock + fr,
                                           static_cast<int>(it.col()) * n_fock + fc, v);
                }
}

} // namespace

namespace {

void append_coupling_terms(std::vector<Eigen::Triplet<cplx>>& trips,
                           const ScaledCoefficients& c, const ProductBasis& basis,
                           const JunctionOperators& j, const FieldOperators& f) {
    const int n = basis.n_phi;
    const int nf = basis.n_fock;
    std::vector<double> cosv(n), sinv(n);
    for (int k = 0; k < n; ++k) {
        const double p = basis.phi(k);
        cosv[k] = std::cos(p);
        sinv[k] = std::sin(p - c.phi_j);
    }
    SparseCd idg(n, n);
    idg.setIdentity();
    add_kron(trips, idg, c.omega * f.n, nf);
    add_kron(trips, diagonal_matrix(cosv), c.eta * f.n + c.kappa * f.n2, nf);
    add_kron(trips, j.q_phi, c.lambda_s * f.x, nf);
    add_kron(trips, diagonal_matrix(sinv), c.mu_s * f.w + c.chi_s * f.w_sym, nf);
}

} // namespace

OperatorMatrix assemble_hamiltonian(const ScaledCoefficients& c, const ProductBasis& basis) {
    if (!basis.contains_single_well(c.I))
        throw std::invalid_argument("assemble_hamiltonian: phase box must contain exactly one well");

    const int n = basis.n_phi;
    const int nf = basis.n_fock;
    const JunctionOperators j = junction_operators(basis, c.mass);
    const FieldOperators f = field_operators(nf);
    const Eigen::MatrixXcd idf = Eigen::MatrixXcd::Identity(nf, nf);

    std::vector<double> u(n);
    for (int k = 0; k < n; ++k) {
        const double p = basis.phi(k);
        u[k] = -c.ej * (std::cos(p) + c.I * p);
    }

    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<size_t>(basis.dim()) * 24);

    add_kron(trips, j.kinetic, idf, nf);
    add_kron(trips, diagonal_matrix(u), idf, nf);
    append_coupling_terms(trips, c, basis, j, f);

    OperatorMatrix h;
    h.mat = SparseCd(basis.dim(), basis.dim());
    h.mat.setFromTriplets(trips.begin(), trips.end());
    h.hermitian = true;
    return h;
}

OperatorMatrix assemble_mode_coupling(const ScaledCoefficients& c, const ProductBasis& basis) {
    const JunctionOperators j = junction_operators(basis, c.mass);
    const FieldOperators f = field_operators(basis.n_fock);
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<size_t>(basis.dim()) * 16);
    append_coupling_terms(trips, c, basis, j, f);
    OperatorMatrix h;
    h.mat = SparseCd(basis.dim(), basis.dim());
    h.mat.setFromTriplets(trips.begin(), trips.end());
    h.hermitian = true;
    return h;
}

Eigen::MatrixXd kerr_matrix(const DerivedCircuit& derived, double I, int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("kerr_matrix: n_modes must be >= 1");
    const double cj = std::cos(junction_phase(I));
    const double g = two_e_SI / hbar_SI;

    std::vector<double> weight(n_modes); // cos^2(k_i d) * L_Ei * omega_i per mode
    for (int j = 0; j < n_modes; ++j) {
        const ModeSolution m = solve_mode(derived, I, j);
        const double ck = std::cos(m.kd);
        weight[j] = ck * ck * m.L_E * m.omega;
    }
    Eigen::MatrixXd kerr(n_modes, n_modes);
    const double pref = -0.25 * derived.E_J / hbar_SI * g * g * g * g * hbar_SI * hbar_SI * cj;
    for (int i = 0; i < n_modes; ++i)
        for (int j = 0; j < n_modes; ++j) kerr(i, j) = pref * weight[i] * weight[j];
    return kerr;
}

std::vector<double> effective_potential(const ScaledCoefficients& c, const FieldMoments& m,
                                        const std::vector<double>& phi_grid) {
    std::vector<double> u(phi_grid.size());
    const double cos_coef = 1.0 + (c.eta * m.n_mean + c.kappa * m.n2_mean) / c.ej;
    const double tilt = c.I + (c.mu_s + c.chi_s * m.n_mean) * m.w_mean / c.ej;
    const double offset = c.omega * m.n_mean;
    for (size_t k = 0; k < phi_grid.size(); ++k) {
        const double p = phi_grid[k];
        u[k] = offset - c.ej * (std::cos(p) * cos_coef + p * tilt);
    }
    return u;
}

OperatorMatrix drive_operator(const ProductBasis& basis, double alpha, double beta,
                              double beta1, double beta2) {
    const int n = basis.n_phi;
    const int nf = basis.n_fock;
    // q_phi needs no mass; reuse the stencil directly
    JunctionOperators j = junction_operators(basis, 1.0);
    FieldOperators f = field_operators(nf);
    const Eigen::MatrixXcd idf = Eigen::MatrixXcd::Identity(nf, nf);
    SparseCd idg(n, n);
    idg.setIdentity();

    const double amp = alpha * beta / (hbar_SI * rad_per_ns); // -> rad/ns per unit operator
    std::vector<Eigen::Triplet<cplx>> trips;
    add_kron(trips, j.q_phi, (amp * beta1) * idf, nf);
    add_kron(trips, idg, (amp * beta2) * f.x, nf);

    OperatorMatrix d;
    d.mat = SparseCd(basis.dim(), basis.dim());
    d.mat.setFromTriplets(trips.begin(), trips.end());
    d.hermitian = true;
    return d;
}

} // namespace cbjj
