#include "cbjj/dynamics.hpp"
#include "cbjj/banded.hpp"
#include "cbjj/constants.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace cbjj {

double PropagationRecord::p_at(double t_s) const {
    if (times.empty()) throw std::runtime_error("empty propagation record");
    if (t_s <= times.front()) return p_switch.front();
    if (t_s >= times.back()) return p_switch.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t_s);
    const size_t i = static_cast<size_t>(it - times.begin());
    const double t0 = times[i - 1], t1 = times[i];
    const double f = (t_s - t0) / (t1 - t0);
    return (1.0 - f) * p_switch[i - 1] + f * p_switch[i];
}

double turning_point(const std::vector<double>& u_eff, const std::vector<double>& grid,
                     double energy, double phi_well_hint) {
    const int n = static_cast<int>(grid.size());
    if (n < 4 || u_eff.size() != grid.size())
        throw std::invalid_argument("turning_point: bad sampling");
    // locate the dressed well minimum near the hint, then the barrier beyond
    int iw = 0;
    double best = std::abs(grid[0] - phi_well_hint);
    for (int k = 1; k < n; ++k) {
        const double d = std::abs(grid[k] - phi_well_hint);
        if (d < best) {
            best = d;
            iw = k;
        }
    }
    while (iw + 1 < n && u_eff[iw + 1] < u_eff[iw]) ++iw;
    while (iw - 1 >= 0 && u_eff[iw - 1] < u_eff[iw]) --iw;
    int ib = iw;
    while (ib + 1 < n && u_eff[ib + 1] > u_eff[ib]) ++ib;

    const bool has_barrier = ib > iw && ib + 1 < n;
    if (!has_barrier || energy > u_eff[ib]) return grid[ib];

    // outermost crossing: scan inward from the box edge
    for (int k = n - 1; k >= ib; --k) {
        if (u_eff[k] >= energy) return grid[std::min(k + 1, n - 1)];
    }
    return grid[ib];
}

std::vector<double> cap_profile(const CapConfig& cap, double phi_t,
                                const std::vector<double>& grid, double phi_edge) {
    cap.validate();
    std::vector<double> v(grid.size(), 0.0);
    const double phi0 = phi_t + cap.onset_margin;
    const double width = phi_edge - phi0;
    if (width <= 0.0 || cap.strength_ghz == 0.0) return v;
    const double s = cap.strength_internal();
    for (size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] <= phi0) continue;
        v[k] = s * std::pow((grid[k] - phi0) / width, cap.power);
    }
    return v;
}

DriveTerms make_drive(const CouplingResult& coupling, double beta) {
    DriveTerms d;
    const double amp = coupling.alpha * beta / (hbar_SI * rad_per_ns);
    d.c1 = amp * coupling.beta1;
    d.c2 = amp * coupling.beta2;
    d.omega_out = to_internal_rate(coupling.omega_out);
    return d;
}

namespace {

constexpr double d2_st[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
constexpr double d1_st[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};

/// everything the stepper precomputes once per run
struct Workspace {
    int n = 0, nf = 0;
    double h = 0, dt = 0;
    std::vector<double> grid, u_wash, cosv, sinv;
    double kin[5]; // kinetic stencil values (real)
    double e_shift = 0;

    Eigen::MatrixXcd V;       // X eigenvectors (columns)
    Eigen::VectorXd sigma;    // X eigenvalues
    std::vector<Eigen::MatrixXcd> b_cayley;  // per phi point: (I+i dt/2 B)^-1 (I-i dt/2 B)
    std::vector<BandedLU> a_lu; // per fock quadrature, refactored each step
    Eigen::MatrixXcd a_band;    // scratch band storage for the A-step factors
    Eigen::VectorXcd bcol;      // scratch column

    Eigen::MatrixXcd fock_n, fock_n2, fock_w, fock_wsym, fock_x;
};

void build_workspace(Workspace& w, const ScaledCoefficients& c, const ProductBasis& basis,
                     double dt) {
    w.n = basis.n_phi;
    w.nf = basis.n_fock;
    w.h = basis.d_phi;
    w.dt = dt;
    w.grid = basis.grid();
    w.u_wash.resize(w.n);
    w.cosv.resize(w.n);
    w.sinv.resize(w.n);
    for (int k = 0; k < w.n; ++k) {
        const double p = w.grid[k];
        w.u_wash[k] = -c.ej * (std::cos(p) + c.I * p);
        w.cosv[k] = std::cos(p);
        w.sinv[k] = std::sin(p - c.phi_j);
    }
    for (int o = 0; o < 5; ++o) w.kin[o] = -d2_st[o] / (2.0 * c.mass * w.h * w.h);

    const FieldOperators f = field_operators(w.nf);
    w.fock_n = f.n;
    w.fock_n2 = f.n2;
    w.fock_w = f.w;
    w.fock_wsym = f.w_sym;
    w.fock_x = f.x;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.x.real());
    w.V = es.eigenvectors().cast<cplx>();
    w.sigma = es.eigenvalues();

    w.b_cayley.resize(w.n);
    w.a_lu.resize(w.nf);
    w.a_band.resize(7, w.n);
    w.bcol.resize(w.nf);
}

/// per-point Fock block (no kinetic, no lambda, no drive, no CAP)
Eigen::MatrixXcd fock_block(const Workspace& w, const ScaledCoefficients& c, int i) {
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(w.nf, w.nf);
    return (w.u_wash[i] - w.e_shift) * id + c.omega * w.fock_n +
           w.cosv[i] * (c.eta * w.fock_n + c.kappa * w.fock_n2) +
           w.sinv[i] * (c.mu_s * w.fock_w + c.chi_s * w.fock_wsym);
}

void factor_b_step(Workspace& w, const ScaledCoefficients& c) {
    // the local blocks are time-independent: store the unitary Cayley map once
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(w.nf, w.nf);
    const cplx ihalf(0.0, 0.5 * w.dt);
    for (int i = 0; i < w.n; ++i) {
        const Eigen::MatrixXcd b = fock_block(w, c, i);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(id + ihalf * b);
        w.b_cayley[i] = lu.solve(id - ihalf * b);
    }
}

/// H applied to a state (no CAP, no drive, no shift); psi is (nf x n)
Eigen::MatrixXcd apply_h(const Workspace& w, const ScaledCoefficients& c,
                         const Eigen::MatrixXcd& psi) {
    const int n = w.n, nf = w.nf;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nf, n);
    // kinetic along phi
    for (int i = 0; i < n; ++i)
        for (int o = -2; o <= 2; ++o) {
            const int j = i + o;
            if (j < 0 || j >= n) continue;
            out.col(i) += w.kin[o + 2] * psi.col(j);
        }
    // lambda * q_phi (x) X
    Eigen::MatrixXcd dpsi = Eigen::MatrixXcd::Zero(nf, n);
    for (int i = 0; i < n; ++i)
        for (int o = -2; o <= 2; ++o) {
            const int j = i + o;
            if (j < 0 || j >= n || d1_st[o + 2] == 0.0) continue;
            dpsi.col(i) += (d1_st[o + 2] / w.h) * psi.col(j);
        }
    out += c.lambda_s * w.fock_x * (cplx(0.0, -1.0) * dpsi);
    // local blocks (with e_shift = 0 contribution removed)
    for (int i = 0; i < n; ++i) {
        out.col(i) += w.u_wash[i] * psi.col(i) + c.omega * (w.fock_n * psi.col(i)) +
                      w.cosv[i] * (c.eta * (w.fock_n * psi.col(i)) +
                                   c.kappa * (w.fock_n2 * psi.col(i))) +
                      w.sinv[i] * (c.mu_s * (w.fock_w * psi.col(i)) +
                                   c.chi_s * (w.fock_wsym * psi.col(i)));
    }
    return out;
}

struct StepMoments {
    FieldMoments field;
    double junction_energy = 0; // <p^2/2M + U_wash>, normalized
    double p_mean = 0;
    double phi_mean = 0;
    double norm_sq = 1;
};

StepMoments compute_moments(const Workspace& w, const Eigen::MatrixXcd& psi,
                            bool need_friction_means, double mass) {
    StepMoments m;
    const int n = w.n, nf = w.nf;
    double nsum = 0, n2sum = 0, wsum = 0, usum = 0, norm = 0, phisum = 0;
    for (int i = 0; i < n; ++i) {
        double colnorm = 0;
        for (int f = 0; f < nf; ++f) {
            const double a2 = std::norm(psi(f, i));
            colnorm += a2;
            nsum += a2 * f;
            n2sum += a2 * f * (f - 1.0);
        }
        for (int f = 0; f + 1 < nf; ++f)
            wsum += 2.0 * (std::conj(psi(f, i)) * cplx(0.0, std::sqrt(f + 1.0)) * psi(f + 1, i))
                        .real();
        norm += colnorm;
        usum += w.u_wash[i] * colnorm;
        if (need_friction_means) phisum += w.grid[i] * colnorm;
    }
    m.norm_sq = norm;
    if (norm < 1e-300) return m;

    // <p^2/(2M)> via the kinetic stencil
    cplx ke(0, 0);
    for (int i = 0; i < n; ++i) {
        for (int o = -2; o <= 2; ++o) {
            const int j = i + o;
            if (j < 0 || j >= n) continue;
            ke += w.kin[o + 2] * psi.col(i).dot(psi.col(j));
        }
    }
    m.junction_energy = (ke.real() + usum) / norm;
    m.field.n_mean = nsum / norm;
    m.field.n2_mean = n2sum / norm;
    m.field.w_mean = wsum / norm;
    if (need_friction_means) {
        m.phi_mean = phisum / norm;
        cplx pm(0, 0);
        for (int i = 0; i < n; ++i)
            for (int o = -2; o <= 2; ++o) {
                const int j = i + o;
                if (j < 0 || j >= n || d1_st[o + 2] == 0.0) continue;
                pm += (d1_st[o + 2] / w.h) * psi.col(i).dot(psi.col(j));
            }
        m.p_mean = (cplx(0.0, -1.0) * pm).real() / norm;
        (void)mass;
    }
    return m;
}

/// refactor the pentadiagonal CN matrices of the kinetic/lambda/drive part
void factor_a_step(Workspace& w, const ScaledCoefficients& c, double c1s, double c2s) {
    const int n = w.n;
    const cplx iq(0.0, 0.25 * w.dt); // half step dt/2, CN splits again by 2
    for (int j = 0; j < w.nf; ++j) {
        const double pcoef = c.lambda_s * w.sigma[j] + c1s;
        const double idcoef = c2s * w.sigma[j];
        // entry A(row, col): kinetic stencil symmetric, d1 antisymmetric; the
        // offset seen from the row is col - row = -o
        cplx entry[5];
        for (int o = -2; o <= 2; ++o) {
            cplx a(w.kin[o + 2], 0.0);
            a += pcoef * (cplx(0.0, -1.0) * (d1_st[2 - o] / w.h));
            if (o == 0) a += idcoef;
            entry[o + 2] = iq * a + (o == 0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0));
        }
        w.a_band.setZero();
        for (int col = 0; col < n; ++col)
            for (int o = -2; o <= 2; ++o) {
                const int row = col + o;
                if (row < 0 || row >= n) continue;
                w.a_band(4 + o, col) = entry[o + 2];
            }
        w.a_lu[j].factor(w.a_band, 2, 2);
    }
}

/// apply (I - i dt/4 A_j) to a row vector x (length n), in place via buffer
void a_step_rhs(const Workspace& w, const ScaledCoefficients& c, double c1s, double c2s, int j,
                const cplx* x, cplx* y) {
    const int n = w.n;
    const double pcoef = c.lambda_s * w.sigma[j] + c1s;
    const double idcoef = c2s * w.sigma[j];
    const cplx iq(0.0, 0.25 * w.dt);
    for (int i = 0; i < n; ++i) {
        cplx acc(0, 0);
        for (int o = -2; o <= 2; ++o) {
            const int k = i + o;
            if (k < 0 || k >= n) continue;
            cplx a(w.kin[o + 2], 0.0);
            a += pcoef * (cplx(0.0, -1.0) * (d1_st[o + 2] / w.h));
            if (o == 0) a += idcoef;
            acc += a * x[k];
        }
        y[i] = x[i] - iq * acc;
    }
}

} // namespace

PropagationRecord propagate(const ScaledCoefficients& coeffs, const ProductBasis& basis,
                            const DriveTerms& drive, const CapConfig& cap,
                            const FrictionConfig& friction, const Eigen::VectorXcd& psi0,
                            double t_final_ns, const PropagateOptions& opts) {
    cap.validate();
    friction.validate();
    if (psi0.size() != basis.dim())
        throw std::invalid_argument("propagate: state dimension mismatch");
    const double n0 = psi0.norm();
    if (std::abs(n0 - 1.0) > 1e-8)
        throw std::invalid_argument("propagate: initial state must be normalized");
    const double dt = opts.dt_ns;
    if (dt <= 0 || t_final_ns <= 0) throw std::invalid_argument("propagate: bad time grid");

    // step-size guard against the populated coupling scale (levels n <~ 4)
    const double coupling_scale =
        std::max({coeffs.omega + std::abs(coeffs.eta), 2.0 * std::abs(coeffs.mu_s),
                  2.0 * std::abs(coeffs.lambda_s),
                  std::abs(drive.c1) + std::abs(drive.c2), std::abs(drive.omega_out)});
    if (dt * coupling_scale >= 0.1)
        throw std::invalid_argument("propagate: dt too large for the coupling scale "
                                    "(dt * omega_scale must stay below 0.1)");

    Workspace w;
    build_workspace(w, coeffs, basis, dt);
    const int n = w.n, nf = w.nf;

    Eigen::MatrixXcd psi = Eigen::Map<const Eigen::MatrixXcd>(psi0.data(), nf, n);

    // energy shift: populated band centre, default <psi0|H|psi0>
    if (opts.energy_shift != 0.0) {
        w.e_shift = opts.energy_shift;
    } else {
        Eigen::MatrixXcd hpsi = apply_h(w, coeffs, psi);
        w.e_shift = (psi.cwiseProduct(hpsi.conjugate())).sum().real();
    }
    factor_b_step(w, coeffs);

    const int nsteps = static_cast<int>(std::ceil(t_final_ns / dt - 1e-9));
    const int stride = std::max(1, static_cast<int>(std::lround(opts.record_stride_ns / dt)));
    const bool fric_on = friction.model == FrictionConfig::Model::momentum_damping &&
                         friction.rate > 0.0;
    const double fric_rate = friction.rate / rad_per_ns; // 1/ns

    PropagationRecord rec;
    rec.times.reserve(nsteps / stride + 2);

    auto record = [&](double t_ns, const StepMoments& m) {
        rec.times.push_back(t_ns * 1e-9);
        rec.norm_sq.push_back(m.norm_sq);
        rec.mean_photon.push_back(m.field.n_mean);
        rec.p_switch.push_back(std::clamp(1.0 - m.norm_sq, 0.0, 1.0));
        if (opts.monitor) opts.monitor(t_ns, m.field);
    };

    StepMoments m0 = compute_moments(w, psi, fric_on, coeffs.mass);
    record(0.0, m0);
    double prev_norm_sq = m0.norm_sq;

    std::vector<cplx> rowbuf(n), rowbuf2(n);
    std::vector<double> vim(n, 0.0);
    Eigen::MatrixXcd phiM(nf, n);

    double t = 0.0;
    for (int step = 0; step < nsteps; ++step) {
        StepMoments mom = (step == 0) ? m0 : compute_moments(w, psi, fric_on, coeffs.mass);

        // absorbing potential from the current dressed turning point
        const FieldMoments fm = opts.freeze_moments ? FieldMoments{} : mom.field;
        const std::vector<double> ueff = effective_potential(coeffs, fm, w.grid);
        const double phi_t = turning_point(ueff, w.grid, mom.junction_energy, coeffs.phi_j);
        const std::vector<double> cap_v = cap_profile(cap, phi_t, w.grid, basis.phi_max);

        const double s_mid = std::sin(drive.omega_out * (t + 0.5 * dt));
        const double c1s = drive.c1 * s_mid;
        const double c2s = drive.c2 * s_mid;
        factor_a_step(w, coeffs, c1s, c2s);

        // A(dt/2)
        phiM.noalias() = w.V.adjoint() * psi;
        for (int j = 0; j < nf; ++j) {
            for (int i = 0; i < n; ++i) rowbuf[i] = phiM(j, i);
            a_step_rhs(w, coeffs, c1s, c2s, j, rowbuf.data(), rowbuf2.data());
            w.a_lu[j].solve(rowbuf2.data());
            for (int i = 0; i < n; ++i) phiM(j, i) = rowbuf2[i];
        }
        psi.noalias() = w.V * phiM;

        // B(dt) with exact CAP decay (commutes with the local block)
        for (int i = 0; i < n; ++i) {
            w.bcol.noalias() = w.b_cayley[i] * psi.col(i);
            double damp = 1.0;
            if (cap_v[i] > 0.0) damp = std::exp(-cap_v[i] * dt);
            if (fric_on) {
                const double vf = fric_rate * mom.p_mean * (w.grid[i] - mom.phi_mean);
                w.bcol *= std::polar(damp, -vf * dt);
            } else if (damp != 1.0) {
                w.bcol *= damp;
            }
            psi.col(i) = w.bcol;
        }

        // A(dt/2), same factors
        phiM.noalias() = w.V.adjoint() * psi;
        for (int j = 0; j < nf; ++j) {
            for (int i = 0; i < n; ++i) rowbuf[i] = phiM(j, i);
            a_step_rhs(w, coeffs, c1s, c2s, j, rowbuf.data(), rowbuf2.data());
            w.a_lu[j].solve(rowbuf2.data());
            for (int i = 0; i < n; ++i) phiM(j, i) = rowbuf2[i];
        }
        psi.noalias() = w.V * phiM;

        t += dt;
        const double nsq = psi.squaredNorm();
        if (nsq > prev_norm_sq * (1.0 + 1e-6))
            throw std::runtime_error("propagate: norm grew by more than 1e-6 in one step; "
                                     "reduce dt");
        prev_norm_sq = nsq;

        if ((step + 1) % stride == 0 || step + 1 == nsteps) {
            StepMoments mrec = compute_moments(w, psi, fric_on, coeffs.mass);
            record(t, mrec);
        }
    }

    // switching rate gamma = -d norm^2/dt (1/s), central differences
    rec.rate.assign(rec.size(), 0.0);
    for (size_t k = 0; k < rec.size(); ++k) {
        const size_t k0 = (k == 0) ? 0 : k - 1;
        const size_t k1 = (k + 1 == rec.size()) ? k : k + 1;
        const double dtk = rec.times[k1] - rec.times[k0];
        if (dtk > 0) rec.rate[k] = -(rec.norm_sq[k1] - rec.norm_sq[k0]) / dtk;
    }
    return rec;
}

DetectionResult detection_run(const DetectionSetup& setup) {
    const DerivedCircuit derived = derive_circuit(setup.circuit);
    const ModeSolution mode = solve_mode(derived, setup.I, 0);
    const HamiltonianCoefficients hc = coefficients(mode, derived, setup.I);
    const ScaledCoefficients sc = to_internal(hc);

    OperatorMatrix h = assemble_hamiltonian(sc, setup.basis);
    auto pairs = eigensolve(h, setup.n_states, setup.basis);
    classify_bound(pairs, sc, setup.basis);

    std::vector<const EigenPair*> bound;
    for (const auto& p : pairs)
        if (p.bound) bound.push_back(&p);
    if (bound.empty()) throw std::runtime_error("detection_run: no bound state to initialize in");

    DetectionResult result;
    result.coeffs = sc;
    result.e0 = bound[0]->energy;
    result.e1 = bound.size() > 1 ? bound[1]->energy : 0.0;

    DriveTerms drive{};
    if (bound.size() > 1) {
        result.coupling =
            external_coupling(mode, setup.circuit, pairs, setup.basis, setup.omega_out_si);
    } else if (setup.omega_out_si) {
        result.coupling = coupling_weights(mode, setup.circuit, *setup.omega_out_si);
    } else if (setup.beta != 0.0) {
        throw std::runtime_error(
            "detection_run: auto-resonant drive needs two bound states; give omega_out");
    }
    if (setup.beta != 0.0) drive = make_drive(result.coupling, setup.beta);

    PropagateOptions popts = setup.prop;
    if (popts.energy_shift == 0.0) popts.energy_shift = result.e0;
    result.record = propagate(sc, setup.basis, drive, setup.cap, setup.friction,
                              bound[0]->state, setup.t_final_ns, popts);
    return result;
}

EfficiencyCurve efficiency(const PropagationRecord& signal, const PropagationRecord& dark) {
    if (signal.size() != dark.size())
        throw std::invalid_argument("efficiency: record lengths differ");
    EfficiencyCurve e;
    e.times = signal.times;
    e.xi.resize(signal.size());
    for (size_t k = 0; k < signal.size(); ++k) {
        if (std::abs(signal.times[k] - dark.times[k]) > 1e-15 + 1e-9 * signal.times[k])
            throw std::invalid_argument("efficiency: time grids do not match");
        e.xi[k] = signal.p_switch[k] - dark.p_switch[k];
        if (e.xi[k] > e.xi_max) {
            e.xi_max = e.xi[k];
            e.t_max = signal.times[k];
        }
    }
    return e;
}

double rabi_time(double omega_rad_per_s) {
    if (omega_rad_per_s == 0.0)
        throw std::domain_error("rabi_time: undefined for zero coupling");
    return pi / std::abs(omega_rad_per_s);
}

} // namespace cbjj
