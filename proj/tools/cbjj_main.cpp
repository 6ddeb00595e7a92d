#include "cbjj/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker threads for sweep points");
}

int run(const CommonOpts& opts, const std::string& kind) {
    cbjj::ExperimentConfig cfg;
    try {
        cfg = cbjj::ExperimentConfig::load(opts.config_path);
        if (cfg.kind.empty())
            cfg.kind = kind;
        else if (cfg.kind != kind)
            throw std::invalid_argument("config kind '" + cfg.kind +
                                        "' does not match subcommand '" + kind + "'");
        if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
        if (opts.threads > 0) cfg.threads = opts.threads;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        const cbjj::ExperimentOutcome oc = cbjj::run_experiment(cfg);
        for (const auto& msg : oc.messages) std::cerr << "warning: " << msg << "\n";
        if (oc.failed_points > 0) {
            std::cerr << oc.failed_points << " sweep point(s) failed\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote results to " << cfg.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quarter-wave resonator + current-biased junction simulator"};
    app.require_subcommand(1);

    CommonOpts spectrum_opts, phase_opts, dyn_opts, sweep_opts, kerr_opts, validity_opts;
    std::string sweep_kind;

    CLI::App* spectrum = app.add_subcommand("spectrum", "bound-state spectrum vs bias");
    add_common(spectrum, spectrum_opts);
    CLI::App* phase = app.add_subcommand("phase-dist", "phase distributions of the bound pair");
    add_common(phase, phase_opts);
    CLI::App* dyn = app.add_subcommand("dynamics", "driven switching dynamics at one bias");
    add_common(dyn, dyn_opts);
    CLI::App* sweep = app.add_subcommand("sweep", "efficiency sweeps");
    sweep->add_option("kind", sweep_kind, "eff_vs_beta | eff_vs_I | eff_vs_freq")->required();
    add_common(sweep, sweep_opts);
    CLI::App* kerr = app.add_subcommand("kerr", "cross-Kerr matrix vs bias");
    add_common(kerr, kerr_opts);
    CLI::App* validity = app.add_subcommand("validity", "single-mode validity ratios");
    add_common(validity, validity_opts);

    CLI11_PARSE(app, argc, argv);

    if (spectrum->parsed()) return run(spectrum_opts, "spectrum_sweep");
    if (phase->parsed()) return run(phase_opts, "phase_dist");
    if (dyn->parsed()) return run(dyn_opts, "dynamics");
    if (sweep->parsed()) {
        if (sweep_kind != "eff_vs_beta" && sweep_kind != "eff_vs_I" && sweep_kind != "eff_vs_freq") {
            std::cerr << "config error: unknown sweep kind '" << sweep_kind << "'\n";
            return 1;
        }
        return run(sweep_opts, sweep_kind);
    }
    if (kerr->parsed()) return run(kerr_opts, "kerr_table");
    if (validity->parsed()) return run(validity_opts, "validity_check");
    return 1;
}
