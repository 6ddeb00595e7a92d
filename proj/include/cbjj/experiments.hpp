#pragma once

#include "cbjj/dynamics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace cbjj {

inline constexpr const char* version_string = "cbjj 0.1.0";

/// Declarative description of one experiment (one figure-style run).
struct ExperimentConfig {
    std::string kind;                 ///< spectrum_sweep, phase_dist, dynamics, eff_vs_beta,
                                      ///< eff_vs_I, eff_vs_freq, kerr_table, validity_check
    CircuitParams circuit;
    std::vector<double> bias;         ///< >= 1 point
    int n_phi = 512;
    int n_fock = 8;
    int n_states = 64;
    CapConfig cap;
    FrictionConfig friction;
    double beta = 1.0;
    std::optional<double> omega_out_ghz; ///< empty: auto-resonant
    double t_final_ns = 130.0;
    double dt_ns = 5.0e-5;
    double record_stride_ns = 0.05;
    std::optional<double> eval_time_ns;
    std::vector<double> sweep_betas;
    std::vector<double> sweep_freqs_ghz;  ///< explicit list; empty: derive from span
    double freq_span_ghz = 0.5;
    int freq_count = 21;
    int kerr_modes = 4;
    std::string out_dir = "results";
    int threads = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    [[nodiscard]] nlohmann::json echo() const;
    void validate() const;
};

/// Outcome of a suite: number of failed sweep points (0 = clean).
struct ExperimentOutcome {
    int failed_points = 0;
    std::vector<std::string> messages;
};

ExperimentOutcome run_spectrum_sweep(const ExperimentConfig& cfg);
ExperimentOutcome run_phase_dist(const ExperimentConfig& cfg);
ExperimentOutcome run_dynamics(const ExperimentConfig& cfg);
ExperimentOutcome run_eff_vs_beta(const ExperimentConfig& cfg);
ExperimentOutcome run_eff_vs_I(const ExperimentConfig& cfg);
ExperimentOutcome run_eff_vs_freq(const ExperimentConfig& cfg);
ExperimentOutcome run_kerr_table(const ExperimentConfig& cfg);
ExperimentOutcome run_validity_check(const ExperimentConfig& cfg);

/// Dispatch on cfg.kind.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

struct LorentzianFit {
    double amplitude = 0;
    double center = 0;       ///< same unit as x
    double fwhm = 0;         ///< same unit as x
    double offset = 0;
    double t1_ns = 0;        ///< 1 / fwhm for x in (non-angular) GHz
    double rms_residual = 0;
};

/// Least-squares Lorentzian fit y = c + A (w/2)^2 / ((x-x0)^2 + (w/2)^2).
/// Throws if the data has no interior peak.
LorentzianFit fit_linewidth(const std::vector<double>& x_ghz, const std::vector<double>& y);

/// Dispatch [0, n_tasks) over a small worker pool; task exceptions are
/// rethrown as messages in the returned list (index -> error).
std::map<int, std::string> parallel_for_collect(int n_tasks, int threads,
                                                const std::function<void(int)>& fn);

/// Deterministic float formatting used in every CSV cell.
std::string csv_number(double v);

} // namespace cbjj
