#include "cbjj/experiments.hpp"
#include "cbjj/constants.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace cbjj {

namespace fs = std::filesystem;
using nlohmann::json;

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

double get_or(const json& j, const char* key, double dflt) {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
}
int get_or_int(const json& j, const char* key, int dflt) {
    return j.contains(key) ? j.at(key).get<int>() : dflt;
}

std::vector<double> parse_bias(const json& j) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<double>());
    } else if (j.is_object()) {
        const double start = j.at("start").get<double>();
        const double stop = j.at("stop").get<double>();
        const int count = j.at("count").get<int>();
        if (count < 1) throw std::invalid_argument("bias range: count must be >= 1");
        for (int i = 0; i < count; ++i)
            out.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1.0));
    } else if (j.is_number()) {
        out.push_back(j.get<double>());
    }
    return out;
}

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& header) : path_(path) {
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open output file " + path.string());
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream out_;
};

void write_sidecar(const fs::path& csv_path, const ExperimentConfig& cfg, const json& extra) {
    json j;
    j["version"] = version_string;
    j["config"] = cfg.echo();
    j["results"] = extra;
    fs::path p = csv_path;
    p += ".meta.json";
    std::ofstream out(p);
    out << j.dump(2) << "\n";
}

void write_record_csv(const fs::path& path, const PropagationRecord& rec) {
    CsvFile csv(path, "t_ns,norm2,mean_photon,P_switch");
    for (size_t k = 0; k < rec.size(); ++k)
        csv.row({csv_number(rec.times[k] * 1e9), csv_number(rec.norm_sq[k]),
                 csv_number(rec.mean_photon[k]), csv_number(rec.p_switch[k])});
}

DetectionSetup make_setup(const ExperimentConfig& cfg, double I, double beta,
                          std::optional<double> omega_out_ghz) {
    DetectionSetup s;
    s.circuit = cfg.circuit;
    s.I = I;
    s.basis = make_default_basis(junction_phase(I), cfg.n_phi, cfg.n_fock);
    s.cap = cfg.cap;
    s.friction = cfg.friction;
    s.beta = beta;
    if (omega_out_ghz) s.omega_out_si = from_ghz(*omega_out_ghz) * rad_per_ns;
    s.t_final_ns = cfg.t_final_ns;
    s.prop.dt_ns = cfg.dt_ns;
    s.prop.record_stride_ns = cfg.record_stride_ns;
    s.n_states = cfg.n_states;
    return s;
}

json coupling_json(const CouplingResult& c) {
    json j;
    j["alpha_J"] = c.alpha;
    j["beta1_V"] = c.beta1;
    j["beta2_V"] = c.beta2;
    j["Omega_over_2pi_MHz"] = c.Omega / (2.0 * pi * 1e6);
    j["omega_out_GHz"] = c.omega_out / (2.0 * pi * 1e9);
    return j;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    c.kind = j.contains("kind") ? j.at("kind").get<std::string>() : "";
    if (j.contains("circuit")) {
        const json& cc = j.at("circuit");
        c.circuit.I_c = get_or(cc, "I_c_uA", 2.0) * 1e-6;
        c.circuit.C_J = get_or(cc, "C_J_fF", 1500.0) * 1e-15;
        c.circuit.Z_0 = get_or(cc, "Z_0_ohm", 50.0);
        c.circuit.omega_bare = from_ghz(get_or(cc, "f_bare_GHz", 7.0)) * rad_per_ns;
        c.circuit.R_J = get_or(cc, "R_J_ohm", 300.0);
        c.circuit.C_out = get_or(cc, "C_out_fF", 5.0) * 1e-15;
        c.circuit.Z_out = get_or(cc, "Z_out_ohm", 2.0e4);
    } else {
        c.circuit.omega_bare = from_ghz(7.0) * rad_per_ns;
        c.circuit.Z_out = 2.0e4;
    }
    if (j.contains("bias")) c.bias = parse_bias(j.at("bias"));
    if (j.contains("basis")) {
        c.n_phi = get_or_int(j.at("basis"), "n_phi", 512);
        c.n_fock = get_or_int(j.at("basis"), "n_fock", 8);
    }
    c.n_states = get_or_int(j, "n_states", 64);
    if (j.contains("cap")) {
        const json& cj = j.at("cap");
        c.cap.strength_ghz = get_or(cj, "strength_GHz", c.cap.strength_ghz);
        c.cap.power = get_or(cj, "power", 2.0);
        c.cap.onset_margin = get_or(cj, "onset_margin_rad", 0.1);
    }
    if (j.contains("friction")) {
        const json& fj = j.at("friction");
        const std::string model = fj.contains("model") ? fj.at("model").get<std::string>() : "off";
        if (model == "off")
            c.friction.model = FrictionConfig::Model::off;
        else if (model == "momentum_damping")
            c.friction.model = FrictionConfig::Model::momentum_damping;
        else
            throw std::invalid_argument("unknown friction model: " + model);
        c.friction.rate = get_or(fj, "rate_per_s", 0.0);
    }
    if (j.contains("drive")) {
        const json& dj = j.at("drive");
        c.beta = get_or(dj, "beta", 1.0);
        if (dj.contains("omega_out_GHz") && !dj.at("omega_out_GHz").is_string())
            c.omega_out_ghz = dj.at("omega_out_GHz").get<double>();
    }
    if (j.contains("time")) {
        const json& tj = j.at("time");
        c.t_final_ns = get_or(tj, "t_final_ns", 130.0);
        c.dt_ns = get_or(tj, "dt_ps", 0.05) * 1e-3;
        c.record_stride_ns = get_or(tj, "record_stride_ps", 50.0) * 1e-3;
    }
    if (j.contains("eval_time_ns") && !j.at("eval_time_ns").is_null())
        c.eval_time_ns = j.at("eval_time_ns").get<double>();
    if (j.contains("sweep")) {
        const json& sj = j.at("sweep");
        if (sj.contains("betas"))
            for (const auto& b : sj.at("betas")) c.sweep_betas.push_back(b.get<double>());
        if (sj.contains("freqs_GHz"))
            for (const auto& f : sj.at("freqs_GHz")) c.sweep_freqs_ghz.push_back(f.get<double>());
        c.freq_span_ghz = get_or(sj, "freq_span_GHz", 0.5);
        c.freq_count = get_or_int(sj, "freq_count", 21);
    }
    c.kerr_modes = get_or_int(j, "kerr_modes", 4);
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    c.threads = get_or_int(j, "threads", 1);
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    json j;
    in >> j;
    return from_json(j);
}

void ExperimentConfig::validate() const {
    static const char* kinds[] = {"spectrum_sweep", "phase_dist", "dynamics",   "eff_vs_beta",
                                  "eff_vs_I",       "eff_vs_freq", "kerr_table", "validity_check"};
    bool ok = false;
    for (const char* k : kinds) ok = ok || kind == k;
    if (!ok) throw std::invalid_argument("unknown experiment kind: " + kind);
    if (bias.empty()) throw std::invalid_argument("config error: empty bias list");
    for (double I : bias)
        if (I < 0.0 || I >= 1.0)
            throw std::invalid_argument("config error: bias values must satisfy 0 <= I < 1");
    circuit.validate();
    cap.validate();
    friction.validate();
    if (t_final_ns <= 0 || dt_ns <= 0) throw std::invalid_argument("config error: bad time grid");
    if (kind == "eff_vs_beta" && sweep_betas.empty())
        throw std::invalid_argument("config error: eff_vs_beta needs sweep.betas");
}

json ExperimentConfig::echo() const {
    json j;
    j["kind"] = kind;
    j["circuit"] = {{"I_c_uA", circuit.I_c * 1e6},          {"C_J_fF", circuit.C_J * 1e15},
                    {"Z_0_ohm", circuit.Z_0},               {"f_bare_GHz", to_ghz(circuit.omega_bare / rad_per_ns)},
                    {"R_J_ohm", circuit.R_J},               {"C_out_fF", circuit.C_out * 1e15},
                    {"Z_out_ohm", circuit.Z_out}};
    j["bias"] = bias;
    j["basis"] = {{"n_phi", n_phi}, {"n_fock", n_fock}};
    j["n_states"] = n_states;
    j["cap"] = {{"strength_GHz", cap.strength_ghz},
                {"power", cap.power},
                {"onset_margin_rad", cap.onset_margin}};
    j["friction"] = {{"model", friction.model == FrictionConfig::Model::off ? "off"
                                                                            : "momentum_damping"},
                     {"rate_per_s", friction.rate}};
    j["drive"] = {{"beta", beta}};
    if (omega_out_ghz)
        j["drive"]["omega_out_GHz"] = *omega_out_ghz;
    else
        j["drive"]["omega_out_GHz"] = "auto";
    j["time"] = {{"t_final_ns", t_final_ns},
                 {"dt_ps", dt_ns * 1e3},
                 {"record_stride_ps", record_stride_ns * 1e3}};
    if (eval_time_ns) j["eval_time_ns"] = *eval_time_ns;
    if (!sweep_betas.empty()) j["sweep"]["betas"] = sweep_betas;
    if (!sweep_freqs_ghz.empty()) j["sweep"]["freqs_GHz"] = sweep_freqs_ghz;
    if (kind == "eff_vs_freq") {
        j["sweep"]["freq_span_GHz"] = freq_span_ghz;
        j["sweep"]["freq_count"] = freq_count;
    }
    j["kerr_modes"] = kerr_modes;
    j["out_dir"] = out_dir;
    j["threads"] = threads;
    return j;
}

std::map<int, std::string> parallel_for_collect(int n_tasks, int threads,
                                                const std::function<void(int)>& fn) {
    std::map<int, std::string> errors;
    threads = std::max(1, std::min(threads, n_tasks));
    if (threads == 1) {
        for (int i = 0; i < n_tasks; ++i) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
        return errors;
    }
    std::atomic<int> next(0);
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mtx);
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return errors;
}

ExperimentOutcome run_spectrum_sweep(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const int np = static_cast<int>(cfg.bias.size());

    struct Row {
        int state_index;
        double energy_ghz, nbar;
        int bound;
    };
    std::vector<std::vector<Row>> rows(np);
    std::vector<int> bound_counts(np, 0);

    const DerivedCircuit derived = derive_circuit(cfg.circuit);
    auto errors = parallel_for_collect(np, cfg.threads, [&](int ip) {
        const double I = cfg.bias[ip];
        const ModeSolution mode = solve_mode(derived, I, 0);
        const ScaledCoefficients sc = to_internal(coefficients(mode, derived, I));
        const ProductBasis basis = make_default_basis(sc.phi_j, cfg.n_phi, cfg.n_fock);
        OperatorMatrix h = assemble_hamiltonian(sc, basis);
        auto pairs = eigensolve(h, cfg.n_states, basis);
        classify_bound(pairs, sc, basis);
        std::vector<Row>& out = rows[ip];
        int idx = 0;
        for (const auto& p : pairs) {
            if (p.bound) ++bound_counts[ip];
            if (p.mean_photon > 3.0) {
                ++idx;
                continue; // display rule: high-occupation states are dropped
            }
            out.push_back({idx, to_ghz(p.energy), p.mean_photon, p.bound ? 1 : 0});
            ++idx;
        }
    });

    CsvFile csv(fs::path(cfg.out_dir) / "spectrum.csv",
                "I,state_index,energy_GHz,mean_photon,bound_flag");
    for (int ip = 0; ip < np; ++ip) {
        if (errors.count(ip)) {
            csv.row({csv_number(cfg.bias[ip]), "-1", "nan", "nan", "-1"});
            continue;
        }
        for (const Row& r : rows[ip])
            csv.row({csv_number(cfg.bias[ip]), std::to_string(r.state_index),
                     csv_number(r.energy_ghz), csv_number(r.nbar), std::to_string(r.bound)});
    }

    json extra;
    extra["bound_counts"] = json::object();
    for (int ip = 0; ip < np; ++ip)
        if (!errors.count(ip))
            extra["bound_counts"][csv_number(cfg.bias[ip])] = bound_counts[ip];
    ExperimentOutcome oc;
    for (const auto& [ip, msg] : errors) {
        oc.messages.push_back("I=" + csv_number(cfg.bias[ip]) + ": " + msg);
        ++oc.failed_points;
    }
    extra["errors"] = oc.messages;
    write_sidecar(csv.path(), cfg, extra);
    return oc;
}

ExperimentOutcome run_phase_dist(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const double I = cfg.bias.front();
    const DerivedCircuit derived = derive_circuit(cfg.circuit);
    const ModeSolution mode = solve_mode(derived, I, 0);
    const HamiltonianCoefficients hc = coefficients(mode, derived, I);
    const ScaledCoefficients sc = to_internal(hc);
    const ProductBasis basis = make_default_basis(sc.phi_j, cfg.n_phi, cfg.n_fock);
    OperatorMatrix h = assemble_hamiltonian(sc, basis);
    auto pairs = eigensolve(h, cfg.n_states, basis);
    classify_bound(pairs, sc, basis);

    std::vector<const EigenPair*> bound;
    for (const auto& p : pairs)
        if (p.bound) bound.push_back(&p);
    if (bound.size() < 2) throw std::runtime_error("phase_dist: fewer than two bound states");

    const auto p0 = phase_distribution(bound[0]->state, basis);
    const auto p1 = phase_distribution(bound[1]->state, basis);

    CsvFile csv(fs::path(cfg.out_dir) / "phase_dist.csv", "phi,P_ground,P_excited");
    for (int k = 0; k < basis.n_phi; ++k)
        csv.row({csv_number(basis.phi(k)), csv_number(p0[k]), csv_number(p1[k])});

    json extra;
    extra["I"] = I;
    extra["coefficients_2pi_GHz"] = {{"eta", to_ghz(sc.eta)},
                                     {"kappa", to_ghz(sc.kappa)},
                                     {"lambda_scaled", to_ghz(sc.lambda_s)},
                                     {"mu_scaled", to_ghz(sc.mu_s)},
                                     {"chi_scaled", to_ghz(sc.chi_s)},
                                     {"omega", to_ghz(sc.omega)}};
    extra["E0_GHz"] = to_ghz(bound[0]->energy);
    extra["E1_GHz"] = to_ghz(bound[1]->energy);
    extra["splitting_GHz"] = to_ghz(bound[1]->energy - bound[0]->energy);
    extra["mean_photon"] = {bound[0]->mean_photon, bound[1]->mean_photon};
    write_sidecar(csv.path(), cfg, extra);
    return {};
}

ExperimentOutcome run_dynamics(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const double I = cfg.bias.front();

    DetectionResult signal = detection_run(make_setup(cfg, I, cfg.beta, cfg.omega_out_ghz));
    DetectionResult dark = detection_run(make_setup(cfg, I, 0.0, cfg.omega_out_ghz));
    const EfficiencyCurve eff = efficiency(signal.record, dark.record);

    write_record_csv(fs::path(cfg.out_dir) / "dynamics_signal.csv", signal.record);
    write_record_csv(fs::path(cfg.out_dir) / "dynamics_dark.csv", dark.record);
    CsvFile ecsv(fs::path(cfg.out_dir) / "efficiency.csv", "t_ns,xi");
    for (size_t k = 0; k < eff.times.size(); ++k)
        ecsv.row({csv_number(eff.times[k] * 1e9), csv_number(eff.xi[k])});

    json extra;
    extra["I"] = I;
    extra["coupling"] = coupling_json(signal.coupling);
    extra["splitting_GHz"] = to_ghz(signal.e1 - signal.e0);
    extra["xi_max"] = eff.xi_max;
    extra["t_max_ns"] = eff.t_max * 1e9;
    if (signal.coupling.Omega > 0)
        extra["rabi_time_ns"] = rabi_time(signal.coupling.Omega) * 1e9;
    write_sidecar(ecsv.path(), cfg, extra);

    ExperimentOutcome oc;
    return oc;
}

ExperimentOutcome run_eff_vs_beta(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const double I = cfg.bias.front();
    DetectionResult dark = detection_run(make_setup(cfg, I, 0.0, cfg.omega_out_ghz));

    const int nb = static_cast<int>(cfg.sweep_betas.size());
    std::vector<double> xi_max(nb, std::nan("")), t_max(nb, std::nan(""));
    auto errors = parallel_for_collect(nb, cfg.threads, [&](int i) {
        DetectionResult sig =
            detection_run(make_setup(cfg, I, cfg.sweep_betas[i], cfg.omega_out_ghz));
        const EfficiencyCurve eff = efficiency(sig.record, dark.record);
        xi_max[i] = eff.xi_max;
        t_max[i] = eff.t_max * 1e9;
    });

    CsvFile csv(fs::path(cfg.out_dir) / "eff_vs_beta.csv", "beta,xi_max,t_max_ns");
    for (int i = 0; i < nb; ++i)
        csv.row({csv_number(cfg.sweep_betas[i]), csv_number(xi_max[i]), csv_number(t_max[i])});

    ExperimentOutcome oc;
    for (const auto& [i, msg] : errors) {
        oc.messages.push_back("beta=" + csv_number(cfg.sweep_betas[i]) + ": " + msg);
        ++oc.failed_points;
    }
    json extra;
    extra["errors"] = oc.messages;
    write_sidecar(csv.path(), cfg, extra);
    return oc;
}

ExperimentOutcome run_eff_vs_I(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const int np = static_cast<int>(cfg.bias.size());
    std::vector<double> xi_max(np, std::nan("")), t_max(np, std::nan("")),
        xi_eval(np, std::nan(""));
    auto errors = parallel_for_collect(np, cfg.threads, [&](int i) {
        const double I = cfg.bias[i];
        DetectionResult sig = detection_run(make_setup(cfg, I, cfg.beta, cfg.omega_out_ghz));
        DetectionResult dk = detection_run(make_setup(cfg, I, 0.0, cfg.omega_out_ghz));
        const EfficiencyCurve eff = efficiency(sig.record, dk.record);
        xi_max[i] = eff.xi_max;
        t_max[i] = eff.t_max * 1e9;
        if (cfg.eval_time_ns) {
            const double te = *cfg.eval_time_ns * 1e-9;
            xi_eval[i] = sig.record.p_at(te) - dk.record.p_at(te);
        } else {
            xi_eval[i] = eff.xi_max;
        }
    });

    CsvFile csv(fs::path(cfg.out_dir) / "eff_vs_I.csv", "I,xi_max,t_max_ns,xi_eval");
    for (int i = 0; i < np; ++i)
        csv.row({csv_number(cfg.bias[i]), csv_number(xi_max[i]), csv_number(t_max[i]),
                 csv_number(xi_eval[i])});

    ExperimentOutcome oc;
    for (const auto& [i, msg] : errors) {
        oc.messages.push_back("I=" + csv_number(cfg.bias[i]) + ": " + msg);
        ++oc.failed_points;
    }
    json extra;
    extra["errors"] = oc.messages;
    if (cfg.eval_time_ns) extra["eval_time_ns"] = *cfg.eval_time_ns;
    write_sidecar(csv.path(), cfg, extra);
    return oc;
}

ExperimentOutcome run_eff_vs_freq(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const double I = cfg.bias.front();

    // reference auto-resonant run fixes the evaluation time and sweep centre
    DetectionResult ref = detection_run(make_setup(cfg, I, cfg.beta, {}));
    DetectionResult dark = detection_run(make_setup(cfg, I, 0.0, {}));
    const EfficiencyCurve ref_eff = efficiency(ref.record, dark.record);
    const double t_eval_ns = cfg.eval_time_ns ? *cfg.eval_time_ns : ref_eff.t_max * 1e9;
    const double center_ghz =
        cfg.omega_out_ghz ? *cfg.omega_out_ghz : to_ghz(ref.e1 - ref.e0);

    std::vector<double> freqs = cfg.sweep_freqs_ghz;
    if (freqs.empty()) {
        for (int i = 0; i < cfg.freq_count; ++i)
            freqs.push_back(center_ghz - 0.5 * cfg.freq_span_ghz +
                            cfg.freq_span_ghz * i / (cfg.freq_count - 1.0));
    }

    const int nf = static_cast<int>(freqs.size());
    std::vector<double> xi(nf, std::nan(""));
    ExperimentConfig point_cfg = cfg;
    point_cfg.t_final_ns = t_eval_ns + 2.0 * cfg.record_stride_ns;
    auto errors = parallel_for_collect(nf, cfg.threads, [&](int i) {
        DetectionResult sig = detection_run(make_setup(point_cfg, I, cfg.beta, freqs[i]));
        xi[i] = sig.record.p_at(t_eval_ns * 1e-9) - dark.record.p_at(t_eval_ns * 1e-9);
    });

    CsvFile csv(fs::path(cfg.out_dir) / "eff_vs_freq.csv", "f_out_GHz,xi");
    for (int i = 0; i < nf; ++i) csv.row({csv_number(freqs[i]), csv_number(xi[i])});

    json extra;
    extra["eval_time_ns"] = t_eval_ns;
    extra["center_GHz"] = center_ghz;
    extra["reference_xi_max"] = ref_eff.xi_max;
    extra["reference_t_max_ns"] = ref_eff.t_max * 1e9;
    extra["coupling"] = coupling_json(ref.coupling);
    ExperimentOutcome oc;
    for (const auto& [i, msg] : errors) {
        oc.messages.push_back("f=" + csv_number(freqs[i]) + ": " + msg);
        ++oc.failed_points;
    }
    extra["errors"] = oc.messages;

    // Lorentzian linewidth -> T1 estimate, when the sweep has a clean peak
    if (oc.failed_points == 0) {
        try {
            const LorentzianFit fit = fit_linewidth(freqs, xi);
            extra["lorentzian_fit"] = {{"fwhm_GHz", fit.fwhm},
                                       {"center_GHz", fit.center},
                                       {"amplitude", fit.amplitude},
                                       {"offset", fit.offset},
                                       {"T1_ns", fit.t1_ns},
                                       {"rms_residual", fit.rms_residual}};
        } catch (const std::exception& e) {
            extra["lorentzian_fit_error"] = e.what();
        }
    }
    write_sidecar(csv.path(), cfg, extra);
    return oc;
}

ExperimentOutcome run_kerr_table(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const DerivedCircuit derived = derive_circuit(cfg.circuit);
    CsvFile csv(fs::path(cfg.out_dir) / "kerr.csv", "I,i,j,kappa_GHz");
    for (double I : cfg.bias) {
        const Eigen::MatrixXd k = kerr_matrix(derived, I, cfg.kerr_modes);
        for (int i = 0; i < k.rows(); ++i)
            for (int j = 0; j < k.cols(); ++j)
                csv.row({csv_number(I), std::to_string(i), std::to_string(j),
                         csv_number(k(i, j) / (2.0 * pi * rad_per_ns))});
    }
    write_sidecar(csv.path(), cfg, json::object());
    return {};
}

ExperimentOutcome run_validity_check(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const DerivedCircuit derived = derive_circuit(cfg.circuit);
    CsvFile csv(fs::path(cfg.out_dir) / "validity.csv",
                "I,ratio_1a1b,ratio_01b,est_population,g_1a1b_GHz,g_01b_GHz,delta_1a1b_GHz,"
                "delta_01b_GHz,omega_b_GHz");
    ExperimentOutcome oc;
    json extra;
    for (double I : cfg.bias) {
        try {
            const ProductBasis basis = make_default_basis(junction_phase(I), cfg.n_phi, cfg.n_fock);
            const ValidityResult v = single_mode_validity(derived, I, basis, cfg.n_states);
            csv.row({csv_number(I), csv_number(v.ratio_1a1b), csv_number(v.ratio_01b),
                     csv_number(v.est_population), csv_number(to_ghz(v.g_1a1b)),
                     csv_number(to_ghz(v.g_01b)), csv_number(to_ghz(v.delta_1a1b)),
                     csv_number(to_ghz(v.delta_01b)),
                     csv_number(v.omega_b / (2.0 * pi * rad_per_ns))});
        } catch (const std::exception& e) {
            csv.row({csv_number(I), "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan"});
            oc.messages.push_back("I=" + csv_number(I) + ": " + e.what());
            ++oc.failed_points;
        }
    }
    extra["errors"] = oc.messages;
    extra["note"] = "direct mode-a/mode-b coupling term omitted from g (no closed form)";
    write_sidecar(csv.path(), cfg, extra);
    return oc;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind == "spectrum_sweep") return run_spectrum_sweep(cfg);
    if (cfg.kind == "phase_dist") return run_phase_dist(cfg);
    if (cfg.kind == "dynamics") return run_dynamics(cfg);
    if (cfg.kind == "eff_vs_beta") return run_eff_vs_beta(cfg);
    if (cfg.kind == "eff_vs_I") return run_eff_vs_I(cfg);
    if (cfg.kind == "eff_vs_freq") return run_eff_vs_freq(cfg);
    if (cfg.kind == "kerr_table") return run_kerr_table(cfg);
    if (cfg.kind == "validity_check") return run_validity_check(cfg);
    throw std::invalid_argument("unknown experiment kind: " + cfg.kind);
}

LorentzianFit fit_linewidth(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 5 || y.size() != x.size())
        throw std::invalid_argument("fit_linewidth: need at least 5 samples");

    int imax = 0;
    double ymin = y[0], ymax = y[0];
    for (int i = 0; i < n; ++i) {
        if (y[i] > ymax) {
            ymax = y[i];
            imax = i;
        }
        ymin = std::min(ymin, y[i]);
    }
    if (imax == 0 || imax == n - 1)
        throw std::runtime_error("fit_linewidth: no interior peak in sweep data");
    if (ymax - ymin < 1e-12 * (std::abs(ymax) + 1.0))
        throw std::runtime_error("fit_linewidth: data is flat");

    // initial guesses
    double A = ymax - ymin, x0 = x[imax], c = ymin;
    const double half = c + 0.5 * A;
    double xl = x.front(), xr = x.back();
    for (int i = imax; i >= 0; --i)
        if (y[i] < half) {
            xl = x[i];
            break;
        }
    for (int i = imax; i < n; ++i)
        if (y[i] < half) {
            xr = x[i];
            break;
        }
    double w = std::max(xr - xl, (x.back() - x.front()) / (n - 1.0));

    // Levenberg-Marquardt on (A, x0, w, c)
    auto residuals = [&](double a, double m, double ww, double cc, Eigen::VectorXd& r,
                         Eigen::MatrixXd* jac) {
        const double s = 0.25 * ww * ww; // (w/2)^2
        for (int i = 0; i < n; ++i) {
            const double d = x[i] - m;
            const double den = d * d + s;
            const double u = s / den;
            r[i] = cc + a * u - y[i];
            if (jac) {
                (*jac)(i, 0) = u;
                (*jac)(i, 1) = a * 2.0 * d * u * u / s;
                (*jac)(i, 2) = a * (d * d / (den * den)) * (0.5 * ww);
                (*jac)(i, 3) = 1.0;
            }
        }
    };

    Eigen::VectorXd r(n), rtry(n);
    Eigen::MatrixXd jac(n, 4);
    double lambda = 1e-3;
    residuals(A, x0, w, c, r, &jac);
    double cost = r.squaredNorm();
    for (int it = 0; it < 500; ++it) {
        Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d g = jac.transpose() * r;
        Eigen::Matrix4d m = jtj;
        for (int d = 0; d < 4; ++d) m(d, d) += lambda * std::max(jtj(d, d), 1e-30);
        const Eigen::Vector4d step = m.ldlt().solve(-g);
        const double At = A + step[0], x0t = x0 + step[1], wt = std::abs(w + step[2]),
                     ct = c + step[3];
        residuals(At, x0t, wt, ct, rtry, nullptr);
        const double cost_try = rtry.squaredNorm();
        if (cost_try < cost) {
            A = At;
            x0 = x0t;
            w = wt;
            c = ct;
            lambda = std::max(lambda * 0.3, 1e-14);
            residuals(A, x0, w, c, r, &jac);
            const bool done = std::abs(cost - cost_try) < 1e-16 * (1.0 + cost);
            cost = cost_try;
            if (done) break;
        } else {
            lambda *= 3.0;
            if (lambda > 1e12) break;
        }
    }

    LorentzianFit fit;
    fit.amplitude = A;
    fit.center = x0;
    fit.fwhm = std::abs(w);
    fit.offset = c;
    fit.t1_ns = fit.fwhm > 0 ? 1.0 / fit.fwhm : 0.0; // x in GHz -> T1 in ns
    fit.rms_residual = std::sqrt(cost / n);
    if (fit.fwhm <= 0 || fit.fwhm > 10.0 * (x.back() - x.front()))
        throw std::runtime_error("fit_linewidth: fit did not produce a sensible width");
    return fit;
}

} // namespace cbjj
