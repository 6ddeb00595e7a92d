// Acceptance suite: runs the quantitative exit criteria and prints one
// PASS/FAIL line per criterion (or sub-check).  Select a group with
//   acceptance static|census|properties|dynamics   (no argument: all)

#include "cbjj/constants.hpp"
#include "cbjj/dynamics.hpp"
#include "cbjj/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

using namespace cbjj;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& label, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", label.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double now_s() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

CircuitParams paper_params() {
    CircuitParams p;
    p.I_c = 2e-6;
    p.C_J = 1500e-15;
    p.Z_0 = 50.0;
    p.omega_bare = 2.0 * pi * 7e9;
    p.R_J = 300.0;
    p.C_out = 5e-15;
    p.Z_out = 2.0e4; // calibrated default, see config notes
    return p;
}

constexpr double two_pi_ghz = 2.0 * pi * 1e9;

struct BoundState {
    double energy;
    double nbar;
};

// bound states among the lowest n_states, ascending energy
std::vector<BoundState> census(double I, int n_phi, int n_fock, int n_states,
                               double* omega_out = nullptr) {
    const auto derived = derive_circuit(paper_params());
    const ModeSolution mode = solve_mode(derived, I, 0);
    const ScaledCoefficients sc = to_internal(coefficients(mode, derived, I));
    if (omega_out) *omega_out = sc.omega;
    const ProductBasis basis = make_default_basis(sc.phi_j, n_phi, n_fock);
    OperatorMatrix h = assemble_hamiltonian(sc, basis);
    EigensolveOptions opts;
    opts.max_lanczos = std::min(basis.dim(), 9 * n_states);
    auto pairs = eigensolve(h, n_states, basis, opts);
    classify_bound(pairs, sc, basis);
    std::vector<BoundState> out;
    for (const auto& p : pairs)
        if (p.bound) out.push_back({p.energy, p.mean_photon});
    return out;
}

// ---------------------------------------------------------------- static --

void run_static() {
    // 1: Hamiltonian coefficient tuple at I = 0.92
    {
        const double t0 = now_s();
        const auto derived = derive_circuit(paper_params());
        const auto c = coefficients(solve_mode(derived, 0.92, 0), derived, 0.92);
        const double elapsed = now_s() - t0;

        const double eta = c.eta / two_pi_ghz;
        const double kap = std::abs(c.kappa) / two_pi_ghz;
        const double lam = std::abs(c.lambda_scaled) / two_pi_ghz;
        const double mu = std::abs(c.mu_scaled) / two_pi_ghz;
        const double chi = std::abs(c.chi_scaled) / two_pi_ghz;
        const bool ok = std::abs(eta - 5.78) < 0.05 * 5.78 && std::abs(kap - 0.03) < 0.01 &&
                        std::abs(lam - 0.90) < 0.05 * 0.90 && std::abs(mu - 29.7) < 0.05 * 29.7 &&
                        std::abs(chi - 0.08) < 0.01 && elapsed < 1.0;
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "(eta,kappa,lambda,mu,chi) = (%.3f, %.3f, %.3f, %.2f, %.3f) x 2pi GHz, "
                      "target (5.78, 0.03, 0.90, 29.7, 0.08), %.3f s",
                      eta, kap, lam, mu, chi, elapsed);
        report(ok, "criterion 1 coefficient tuple", buf);
    }

    // 2: ultrastrong ratio at I = 0.9
    {
        const auto derived = derive_circuit(paper_params());
        const auto c = coefficients(solve_mode(derived, 0.90, 0), derived, 0.90);
        const double ratio = std::abs(c.mu_scaled) / c.omega;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "mu_scaled/omega = %.3f, target 3.5 within 10%%", ratio);
        report(std::abs(ratio - 3.5) < 0.35, "criterion 2 ultrastrong ratio", buf);
    }

    // 3: external coupling at C_out = 5 fF, I = 0.92
    {
        const auto params = paper_params();
        const auto derived = derive_circuit(params);
        const ModeSolution mode = solve_mode(derived, 0.92, 0);
        const ScaledCoefficients sc = to_internal(coefficients(mode, derived, 0.92));
        const ProductBasis basis = make_default_basis(sc.phi_j, 512, 8);
        auto pairs = eigensolve(assemble_hamiltonian(sc, basis), 64, basis);
        classify_bound(pairs, sc, basis);
        const CouplingResult r = external_coupling(mode, params, pairs, basis);
        const double mhz = r.Omega / (2.0 * pi * 1e6);
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "|Omega| = 2pi x %.2f MHz (target 29 within 10%%), omega_out = %.3f GHz",
                      mhz, r.omega_out / (2.0 * pi * 1e9));
        report(std::abs(mhz - 29.0) < 2.9, "criterion 3 external coupling", buf);
    }

    // 9: single-mode validity
    {
        const auto derived = derive_circuit(paper_params());
        const ProductBasis basis = make_default_basis(junction_phase(0.92), 384, 8);
        const ValidityResult v = single_mode_validity(derived, 0.92, basis, 96);
        const bool ok = v.ratio_1a1b <= 0.15 && v.est_population >= 0.003 &&
                        v.est_population <= 0.03;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "|g/Delta| = %.3f (<= 0.15), admixture = %.2f%% (target ~1%%, window "
                      "[0.3%%, 3%%]), omega_b = %.2f GHz",
                      v.ratio_1a1b, 100.0 * v.est_population, v.omega_b / (2.0 * pi * 1e9));
        report(ok, "criterion 9 single-mode validity", buf);
    }
}

// ---------------------------------------------------------------- census --

void run_census() {
    const double t0 = now_s();
    const std::vector<double> biases = {0.85, 0.88, 0.90, 0.92, 0.94};
    // Fock-converged census basis: at n_fock = 8 one marginal resonance at
    // I = 0.92 flips its classification with the truncation; 12 levels settle it.
    const int n_phi = 384, n_fock = 12, n_states = 170;

    std::vector<int> counts;
    int lowest_band_092 = -1;
    double split_092 = 0;
    for (double I : biases) {
        double omega = 0;
        const auto bs = census(I, n_phi, n_fock, n_states, &omega);
        counts.push_back(static_cast<int>(bs.size()));
        if (std::abs(I - 0.92) < 1e-9 && !bs.empty()) {
            // lowest band: maximal run of bound states with gaps below omega/2
            int nb = 1;
            for (size_t k = 1; k < bs.size(); ++k) {
                if (bs[k].energy - bs[k - 1].energy < 0.5 * omega)
                    ++nb;
                else
                    break;
            }
            lowest_band_092 = nb;
            if (bs.size() >= 2) split_092 = to_ghz(bs[1].energy - bs[0].energy);
        }
        std::printf("  I = %.2f: %zu bound state(s)\n", I, bs.size());
        std::fflush(stdout);
    }

    {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "lowest-band bound count at I = 0.92 is %d (target 2), splitting %.3f GHz",
                      lowest_band_092, split_092);
        report(lowest_band_092 == 2, "criterion 4a bound pair at I=0.92", buf);
    }
    {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "bound count at I = 0.94 is %d (target 0)",
                      counts[4]);
        report(counts[4] == 0, "criterion 4b no bound state at I=0.94", buf);
    }
    {
        bool mono = true;
        for (size_t k = 1; k < counts.size(); ++k) mono = mono && counts[k] <= counts[k - 1];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "counts over I = {0.85,0.88,0.90,0.92,0.94}: "
                                        "%d, %d, %d, %d, %d",
                      counts[0], counts[1], counts[2], counts[3], counts[4]);
        report(mono, "criterion 4c bound count non-increasing", buf);
    }
    {
        const double elapsed = now_s() - t0;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "census sweep took %.1f s (limit 600 s)", elapsed);
        report(elapsed < 600.0, "criterion 4d census runtime", buf);
    }
}

// ------------------------------------------------------------ properties --

struct ReducedRun {
    EfficiencyCurve eff;
    DetectionResult signal;
};

ReducedRun reduced_pair(double dt_ns, double cap_strength, double cap_power) {
    DetectionSetup s;
    s.circuit = paper_params();
    s.I = 0.92;
    s.basis = make_default_basis(junction_phase(0.92), 192, 6);
    s.cap.strength_ghz = cap_strength;
    s.cap.power = cap_power;
    s.beta = 1.0;
    s.t_final_ns = 130.0; // xi peaks near 100-130 ns; shorter horizons truncate it
    s.prop.dt_ns = dt_ns;
    s.prop.record_stride_ns = 0.05;
    s.n_states = 48;
    DetectionResult sig = detection_run(s);
    s.beta = 0.0;
    DetectionResult dark = detection_run(s);
    return {efficiency(sig.record, dark.record), std::move(sig)};
}

void run_properties() {
    const auto derived = derive_circuit(paper_params());

    // Hermiticity at the default basis
    {
        const ScaledCoefficients sc = to_internal(coefficients(solve_mode(derived, 0.92, 0),
                                                               derived, 0.92));
        const ProductBasis basis = make_default_basis(sc.phi_j, 512, 8);
        const double defect = hermiticity_defect(assemble_hamiltonian(sc, basis).mat);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "max|H - H^+|/max|H| = %.2e (bound 1e-12)", defect);
        report(defect < 1e-12, "criterion 10 hermiticity", buf);
    }

    // root-finder residual over branches and biases
    {
        double worst = 0;
        for (int j = 0; j <= 3; ++j)
            for (double I = 0.0; I <= 0.99; I += 0.11) {
                const double kd = solve_wavenumber(derived, I, j);
                const double r = derived.L_T_total / derived.L_J * std::cos(junction_phase(I));
                worst = std::max(worst, std::abs(kd * std::tan(kd) - r) / (1.0 + r));
            }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "worst residual %.2e (bound 1e-12)", worst);
        report(worst < 1e-12, "criterion 10 wavenumber residual", buf);
    }

    // approximate vs exact wavenumber in the stated regime
    {
        double worst = 0;
        for (double I = 0.0; I <= 0.30; I += 0.03) {
            const double ratio = derived.L_J / (derived.L_T_total * std::cos(junction_phase(I)));
            if (ratio >= 0.1) continue;
            const double exact = solve_wavenumber(derived, I, 0);
            worst = std::max(worst, std::abs(approx_wavenumber(derived, I, 0) - exact) / exact);
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "worst deviation %.2f%% (bound 2%%)", 100 * worst);
        report(worst < 0.02, "criterion 10 approximate wavenumber", buf);
    }

    // kerr matrix symmetry and kappa_00 consistency
    {
        const Eigen::MatrixXd k = kerr_matrix(derived, 0.9, 4);
        double asym = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) asym = std::max(asym, std::abs(k(i, j) - k(j, i)));
        const auto c = coefficients(solve_mode(derived, 0.9, 0), derived, 0.9);
        const double expect = c.kappa * std::cos(c.phi_J_hat);
        const double rel = std::abs(k(0, 0) - expect) / std::abs(expect);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "max asymmetry %.2e, kappa_00 relative error %.2e",
                      asym, rel);
        report(asym == 0.0 && rel < 1e-10, "criterion 10 kerr consistency", buf);
    }

    // eigen-residuals at the default basis (iterative path)
    {
        const ScaledCoefficients sc = to_internal(coefficients(solve_mode(derived, 0.92, 0),
                                                               derived, 0.92));
        const ProductBasis basis = make_default_basis(sc.phi_j, 512, 8);
        const OperatorMatrix h = assemble_hamiltonian(sc, basis);
        auto pairs = eigensolve(h, 48, basis);
        double hnorm = 0;
        for (int k = 0; k < h.mat.outerSize(); ++k) {
            double rs = 0;
            for (SparseCd::InnerIterator it(h.mat, k); it; ++it) rs += std::abs(it.value());
            hnorm = std::max(hnorm, rs);
        }
        double worst = 0;
        for (const auto& p : pairs)
            worst = std::max(worst, (h.mat * p.state - p.energy * p.state).norm());
        char buf[128];
        std::snprintf(buf, sizeof(buf), "worst ||Hv-Ev|| = %.2e, bound %.2e", worst,
                      1e-8 * hnorm);
        report(worst <= 1e-8 * hnorm, "criterion 10 eigen residuals", buf);
    }

    // stationary-state norm conservation over 100 ns with the absorber off
    {
        const ScaledCoefficients sc = to_internal(coefficients(solve_mode(derived, 0.9, 0),
                                                               derived, 0.9));
        const ProductBasis basis = make_default_basis(sc.phi_j, 128, 3);
        auto pairs = eigensolve(assemble_hamiltonian(sc, basis), 4, basis);
        classify_bound(pairs, sc, basis);
        const EigenPair* gs = nullptr;
        for (const auto& p : pairs)
            if (p.bound) {
                gs = &p;
                break;
            }
        CapConfig cap;
        cap.strength_ghz = 0.0;
        PropagateOptions opts;
        opts.dt_ns = 2.5e-4;
        opts.record_stride_ns = 10.0;
        const auto rec = propagate(sc, basis, DriveTerms{}, cap, FrictionConfig{}, gs->state,
                                   100.0, opts);
        double worst = 0;
        for (double n : rec.norm_sq) worst = std::max(worst, std::abs(n - 1.0));
        char buf[96];
        std::snprintf(buf, sizeof(buf), "max |norm^2 - 1| = %.2e over 100 ns (bound 1e-8)",
                      worst);
        report(worst < 1e-8, "criterion 10 stationary norm", buf);
    }

    // reduced-config efficiency runs: dt-halving, CAP strength and power
    {
        const ReducedRun base = reduced_pair(2.0e-4, 45.0, 2.0);
        const ReducedRun half = reduced_pair(1.0e-4, 45.0, 2.0);
        const ReducedRun strong = reduced_pair(2.0e-4, 90.0, 2.0);
        const ReducedRun cubic = reduced_pair(2.0e-4, 45.0, 3.0);

        bool mono = true;
        for (size_t k = 1; k < base.signal.record.size(); ++k)
            mono = mono &&
                   base.signal.record.p_switch[k] + 1e-12 >= base.signal.record.p_switch[k - 1];
        report(mono, "criterion 10 monotone switching probability",
               mono ? "P(t) non-decreasing at every record" : "P(t) decreased somewhere");

        const double d_dt = std::abs(half.eff.xi_max - base.eff.xi_max) / base.eff.xi_max;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "xi_max %.4f -> %.4f, change %.3f%% (bound 0.5%%)",
                      base.eff.xi_max, half.eff.xi_max, 100 * d_dt);
        report(d_dt < 0.005, "criterion 10 dt-halving stability", buf);

        const double d_s = std::abs(strong.eff.xi_max - base.eff.xi_max) / base.eff.xi_max;
        std::snprintf(buf, sizeof(buf), "xi_max %.4f -> %.4f, change %.2f%% (bound 5%%)",
                      base.eff.xi_max, strong.eff.xi_max, 100 * d_s);
        report(d_s < 0.05, "criterion 10 absorber-strength stability", buf);

        const double d_p = std::abs(cubic.eff.xi_max - base.eff.xi_max) / base.eff.xi_max;
        std::snprintf(buf, sizeof(buf), "xi_max %.4f -> %.4f, change %.2f%% (bound 5%%)",
                      base.eff.xi_max, cubic.eff.xi_max, 100 * d_p);
        report(d_p < 0.05, "criterion 10 absorber-power stability", buf);
    }

    // grid-doubling stability of the two lowest bound levels at I = 0.92
    {
        const auto coarse = census(0.92, 512, 8, 64);
        const auto fine = census(0.92, 1024, 16, 120);
        bool ok = coarse.size() >= 2 && fine.size() >= 2;
        double d0 = 0, d1 = 0;
        if (ok) {
            d0 = std::abs(fine[0].energy - coarse[0].energy) / std::abs(coarse[0].energy);
            d1 = std::abs(fine[1].energy - coarse[1].energy) / std::abs(coarse[1].energy);
            ok = d0 < 1e-3 && d1 < 1e-3;
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "relative changes %.2e, %.2e (bound 1e-3)", d0, d1);
        report(ok, "criterion 10 grid-doubling stability", buf);
    }
}

// -------------------------------------------------------------- dynamics --

DetectionSetup headline_setup(double beta) {
    DetectionSetup s;
    s.circuit = paper_params();
    s.I = 0.92;
    s.basis = make_default_basis(junction_phase(0.92), 256, 8);
    s.beta = beta;
    s.t_final_ns = 130.0;
    s.prop.dt_ns = 1.0e-4;
    s.prop.record_stride_ns = 0.05;
    s.n_states = 64;
    return s;
}

void run_dynamics() {
    // criterion 5: detection dynamics at I = 0.92, beta = 1
    double wall_signal = now_s();
    DetectionResult signal = detection_run(headline_setup(1.0));
    wall_signal = now_s() - wall_signal;
    double wall_dark = now_s();
    DetectionResult dark = detection_run(headline_setup(0.0));
    wall_dark = now_s() - wall_dark;
    const EfficiencyCurve eff = efficiency(signal.record, dark.record);

    {
        const double p90 = signal.record.p_at(90e-9);
        const double tmax_ns = eff.t_max * 1e9;
        const bool ok = p90 >= 0.95 && eff.xi_max >= 0.95 && tmax_ns >= 60.0 &&
                        tmax_ns <= 110.0 && wall_signal < 1800.0 && wall_dark < 1800.0;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "P(90 ns) = %.4f (>= 0.95), xi_max = %.4f (>= 0.95), t_max = %.1f ns "
                      "(in [60,110]), runs %.0f s / %.0f s (< 1800 s)",
                      p90, eff.xi_max, tmax_ns, wall_signal, wall_dark);
        report(ok, "criterion 5 detection dynamics", buf);
        std::printf("  |Omega| = 2pi x %.2f MHz, splitting %.4f GHz, rabi %.1f ns\n",
                    signal.coupling.Omega / (2e6 * pi), to_ghz(signal.e1 - signal.e0),
                    rabi_time(signal.coupling.Omega) * 1e9);
    }

    // criterion 6: shoulder (local slope minimum) within t in [5, 15] ns
    {
        const auto& rec = signal.record;
        // smoothed slope on a ~0.5 ns window
        auto slope = [&](size_t k, size_t m) {
            const size_t a = k >= m ? k - m : 0;
            const size_t b = std::min(k + m, rec.size() - 1);
            return (rec.p_switch[b] - rec.p_switch[a]) / (rec.times[b] - rec.times[a]);
        };
        const size_t m = 10; // 0.5 ns at the 0.05 ns record stride
        size_t kmin = 0;
        double smin = 1e300;
        for (size_t k = 0; k < rec.size(); ++k) {
            const double t_ns = rec.times[k] * 1e9;
            if (t_ns < 5.0 || t_ns > 15.0) continue;
            const double s = slope(k, m);
            if (s < smin) {
                smin = s;
                kmin = k;
            }
        }
        // neighbours 2.5 ns away on both sides must climb back up
        const size_t off = 50;
        const double s_before = slope(kmin - off, m);
        const double s_after = slope(kmin + off, m);
        const bool ok = smin < s_before && smin < s_after;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "slope minimum %.3e /s at t = %.2f ns, neighbours %.3e (before), "
                      "%.3e (after)",
                      smin, rec.times[kmin] * 1e9, s_before, s_after);
        report(ok, "criterion 6 shoulder near half the Rabi time", buf);
    }

    // criterion 7: saturation in the drive strength
    {
        DetectionResult half = detection_run(headline_setup(0.5));
        const EfficiencyCurve eff_half = efficiency(half.record, dark.record);
        const bool ok = eff_half.xi_max >= 0.95 * eff.xi_max;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "xi_max(0.5) = %.4f vs 0.95 * xi_max(1) = %.4f",
                      eff_half.xi_max, 0.95 * eff.xi_max);
        report(ok, "criterion 7 beta saturation", buf);
    }

    // criterion 8: bandwidth and Lorentzian linewidth at fixed evaluation time
    {
        const double t_eval_ns = eff.t_max * 1e9;
        const double center_ghz = to_ghz(signal.e1 - signal.e0);

        DetectionSetup sweep = headline_setup(1.0);
        sweep.basis = make_default_basis(junction_phase(0.92), 192, 6);
        sweep.prop.dt_ns = 2.0e-4;
        sweep.n_states = 48;
        sweep.t_final_ns = t_eval_ns + 0.5;

        DetectionSetup dark_sweep = sweep;
        dark_sweep.beta = 0.0;
        DetectionResult dark_b = detection_run(dark_sweep);

        const int npts = 21;
        const double span = 0.5;
        std::vector<double> freqs, xi(npts);
        for (int i = 0; i < npts; ++i)
            freqs.push_back(center_ghz - span / 2 + span * i / (npts - 1.0));

        for (int i = 0; i < npts; ++i) {
            DetectionSetup s = sweep;
            s.omega_out_si = from_ghz(freqs[i]) * rad_per_ns;
            DetectionResult r = detection_run(s);
            xi[i] = r.record.p_at(t_eval_ns * 1e-9) - dark_b.record.p_at(t_eval_ns * 1e-9);
            std::printf("  f = %.4f GHz: xi = %.4f\n", freqs[i], xi[i]);
            std::fflush(stdout);
        }

        // contiguous window around the peak with xi > 0.9, interpolated edges
        int ipk = 0;
        for (int i = 1; i < npts; ++i)
            if (xi[i] > xi[ipk]) ipk = i;
        double lo = freqs[ipk], hi = freqs[ipk];
        for (int i = ipk; i > 0; --i) {
            if (xi[i - 1] >= 0.9) {
                lo = freqs[i - 1];
            } else {
                const double f = (0.9 - xi[i]) / (xi[i - 1] - xi[i]);
                lo = freqs[i] + f * (freqs[i - 1] - freqs[i]);
                break;
            }
        }
        for (int i = ipk; i < npts - 1; ++i) {
            if (xi[i + 1] >= 0.9) {
                hi = freqs[i + 1];
            } else {
                const double f = (0.9 - xi[i]) / (xi[i + 1] - xi[i]);
                hi = freqs[i] + f * (freqs[i + 1] - freqs[i]);
                break;
            }
        }
        const double window_mhz = (xi[ipk] > 0.9) ? (hi - lo) * 1e3 : 0.0;

        double t1_ns = 0;
        bool fit_ok = false;
        std::string fit_msg = "fit failed";
        try {
            const LorentzianFit fit = fit_linewidth(freqs, xi);
            t1_ns = fit.t1_ns;
            fit_ok = t1_ns >= 4.0 && t1_ns <= 15.0;
            fit_msg = "FWHM = " + std::to_string(fit.fwhm * 1e3) + " MHz";
        } catch (const std::exception& e) {
            fit_msg = e.what();
        }

        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "xi > 0.9 window = %.0f MHz (>= 80), T1 = %.2f ns (in [4,15]), %s, "
                      "evaluated at %.1f ns",
                      window_mhz, t1_ns, fit_msg.c_str(), t_eval_ns);
        report(window_mhz >= 80.0 && fit_ok, "criterion 8 bandwidth and linewidth", buf);
    }
}

} // namespace

int main(int argc, char** argv) {
    const std::string group = argc > 1 ? argv[1] : "all";
    if (group == "static" || group == "all") run_static();
    if (group == "census" || group == "all") run_census();
    if (group == "properties" || group == "all") run_properties();
    if (group == "dynamics" || group == "all") run_dynamics();
    if (g_failures > 0) {
        std::printf("%d criterion check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all selected criteria passed\n");
    return 0;
}
