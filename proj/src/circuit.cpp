#include "cbjj/circuit.hpp"
#include "cbjj/constants.hpp"

#include <cmath>
#include <string>

namespace cbjj {

void CircuitParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw std::invalid_argument(std::string("circuit parameter must be positive: ") + name);
    };
    positive(I_c, "I_c");
    positive(C_J, "C_J");
    positive(Z_0, "Z_0");
    positive(omega_bare, "omega_bare");
    positive(R_J, "R_J");
    positive(Z_out, "Z_out");
    if (C_out < 0.0)
        throw std::invalid_argument("circuit parameter must be non-negative: C_out");
}

DerivedCircuit derive_circuit(const CircuitParams& params) {
    params.validate();
    DerivedCircuit d;
    d.E_J = hbar_SI / two_e_SI * params.I_c;
    d.L_J = (hbar_SI / two_e_SI) * (hbar_SI / two_e_SI) / d.E_J;
    // lambda/4 line: omega_bare = pi / (2 sqrt(LT d * CT d)), Z_0 = sqrt(LT/CT)
    d.L_T_total = params.Z_0 * pi / (2.0 * params.omega_bare);
    d.C_T_total = pi / (2.0 * params.Z_0 * params.omega_bare);
    d.C_J = params.C_J;
    d.M_bare = params.C_J * (hbar_SI / two_e_SI) * (hbar_SI / two_e_SI);
    return d;
}

double junction_phase(double I) {
    if (I < 0.0)
        throw std::invalid_argument("bias current must satisfy 0 <= I");
    if (I >= 1.0)
        throw std::domain_error("overcritical bias: I >= 1 has no static phase solution");
    return std::asin(I);
}

namespace {

// kd*tan(kd) - r, well-defined away from the pole at j*pi + pi/2.
inline double branch_fn(double kd, double r) { return kd * std::tan(kd) - r; }

} // namespace

double solve_wavenumber(const DerivedCircuit& derived, double I, int mode_index) {
    if (mode_index < 0)
        throw std::invalid_argument("mode_index must be >= 0");
    const double phi_j = junction_phase(I);
    const double r = derived.L_T_total / derived.L_J * std::cos(phi_j);

    // On each branch f(kd) = kd*tan(kd) - r runs from -r at kd = j*pi up to
    // +inf at the pole j*pi + pi/2, so the root is always bracketed.
    const double base = mode_index * pi;
    double lo = base;
    double hi = base + pi / 2.0 - 1e-12;

    const double tol = 1e-14 * (1.0 + r);
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = branch_fn(mid, r);
        if (std::abs(f) < tol) break;
        if (f < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-16 * (1.0 + mid)) break;
    }
    // Newton polish: f' = tan(kd) + kd/cos^2(kd)
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double t = std::tan(x);
        const double c = std::cos(x);
        const double f = x * t - r;
        const double df = t + x / (c * c);
        const double step = f / df;
        const double xn = x - step;
        if (xn > base && xn < base + pi / 2.0) x = xn;
        if (std::abs(step) < 1e-16 * (1.0 + x)) break;
    }
    return x;
}

double approx_wavenumber(const DerivedCircuit& derived, double I, int mode_index) {
    if (mode_index < 0)
        throw std::invalid_argument("mode_index must be >= 0");
    const double phi_j = junction_phase(I);
    const double ratio = derived.L_J / (derived.L_T_total * std::cos(phi_j));
    return pi * (1.0 + 2.0 * mode_index) / (2.0 * (1.0 + ratio));
}

ModeSolution lumped_constants(const DerivedCircuit& derived, double I, double kd,
                              int mode_index) {
    ModeSolution m;
    m.mode_index = mode_index;
    m.kd = kd;
    m.phi_J_hat = junction_phase(I);

    const double ctd = derived.C_T_total;
    const double ltd = derived.L_T_total;
    const double cj = derived.C_J;
    const double s2 = std::sin(2.0 * kd) / (2.0 * kd);
    const double ck = std::cos(kd);

    m.C_E = 0.5 * ctd * (1.0 + s2) + cj * ck * ck;
    m.C_0 = ctd + cj;
    m.C_c = ctd * std::sin(kd) / kd + cj * ck;
    m.L_E = 1.0 / (kd * kd / (2.0 * ltd) * (1.0 - s2));
    m.omega = 1.0 / std::sqrt(m.L_E * (m.C_E - m.C_c * m.C_c / m.C_0));
    return m;
}

ModeSolution solve_mode(const DerivedCircuit& derived, double I, int mode_index) {
    const double kd = solve_wavenumber(derived, I, mode_index);
    return lumped_constants(derived, I, kd, mode_index);
}

} // namespace cbjj
