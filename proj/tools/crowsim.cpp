// crowsim command-line front end:
//   crowsim run --config <file> --out <dir> [--threads N] [--allow-nonperturbative]
//   crowsim estimate --q ... --omega ... --g ... --n ... --delta ...
//   crowsim list-experiments

#include "crowsim/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int cmd_run(const std::string& config, const std::string& out_dir, int threads,
            bool allow_nonperturbative) {
    crowsim::RunOptions run;
    run.out_dir = out_dir;
    run.threads = threads;
    run.allow_nonperturbative = allow_nonperturbative;

    const crowsim::ExperimentOutcome outcome = crowsim::run_experiment_file(config, run);
    if (outcome.exit_code == 2) {
        std::cerr << "crowsim: config error: " << outcome.error << '\n';
        return 2;
    }
    for (const std::string& f : outcome.files) std::cout << "wrote " << f << '\n';
    if (outcome.exit_code == 3) {
        std::cerr << "crowsim: tolerance failure; see tolerance_checks in report.json\n";
        return 3;
    }
    return 0;
}

int cmd_estimate(const crowsim::DeviceParams& params) {
    const crowsim::FeasibilityReport r = crowsim::params_estimate(params);
    auto line = [](const char* name, double seconds, bool ok) {
        std::cout << "  " << name << ": " << seconds * 1e9 << " ns"
                  << (ok ? "  [within T1]" : "  [exceeds T1]") << '\n';
    };
    std::cout << "T1 = Q/omega: " << r.t1_s * 1e9 << " ns  (gamma = " << r.gamma
              << " rad/s)\n";
    std::cout << "single-qubit pi-phase time\n";
    line("N convention      pi*Delta/(N g^2)      ", r.pi_phase_time_n_convention_s,
         r.pi_phase_within_t1_n);
    line("sqrt(N) convention pi*Delta/(sqrt(N) g^2)", r.pi_phase_time_sqrt_n_convention_s,
         r.pi_phase_within_t1_sqrt_n);
    std::cout << "two-photon gate time\n";
    line("N convention      ", r.two_photon_gate_time_n_convention_s, r.two_photon_within_t1_n);
    line("sqrt(N) convention", r.two_photon_gate_time_sqrt_n_convention_s,
         r.two_photon_within_t1_sqrt_n);
    line("photon crossing time", r.crossing_time_s, r.crossing_within_t1);
    return 0;
}

void cmd_list() {
    std::cout << "experiments:\n";
    for (const crowsim::detail::ExperimentEntry& e : crowsim::detail::experiment_registry()) {
        std::cout << "  " << e.name << "\n    " << e.summary << "\n    outputs: " << e.csv_schema
                  << '\n';
    }
    std::cout << "\nconfig file: JSON with keys experiment, model (paper|effective|cascade),\n"
                 "condition (paper|calibrated|custom), params {...}, sweep {parameter, min,\n"
                 "max, points}, flags {...}. Exit codes: 0 ok, 2 config error, 3 tolerance\n"
                 "failure.\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fock-space simulator and gate calibrator for doped coupled-cavity "
                 "waveguide devices"};
    app.set_version_flag("--version", std::string(crowsim::kVersion));
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path, out_dir = ".";
    int threads = 1;
    bool allow_nonperturbative = false;
    run->add_option("--config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_dir, "output directory (default: current)");
    run->add_option("--threads", threads, "sweep worker threads (1 = bit-reproducible)")
        ->check(CLI::PositiveNumber);
    run->add_flag("--allow-nonperturbative", allow_nonperturbative,
                  "accept configs outside the dispersive regime");

    // estimate
    auto* est = app.add_subcommand("estimate", "feasibility estimates from device parameters");
    crowsim::DeviceParams dp;
    dp.omega = 2.0 * crowsim::kPi * crowsim::kSpeedOfLight / 852e-9;
    dp.g = 3e9;
    dp.n_dopants = 100;
    dp.detuning = 3e10;
    est->add_option("--q", dp.quality_factor, "cavity quality factor");
    est->add_option("--omega", dp.omega, "photon angular frequency, rad/s");
    est->add_option("--g", dp.g, "single-dopant coupling, rad/s");
    est->add_option("--n", dp.n_dopants, "dopant count per defect");
    est->add_option("--delta", dp.detuning, "dispersive detuning, rad/s");
    est->add_option("--vg", dp.v_g_fraction, "group velocity as a fraction of c");
    est->add_option("--length", dp.device_length, "device length in lattice constants");
    est->add_option("--lattice-constant", dp.lattice_constant_m, "lattice constant, m");

    // list-experiments
    auto* list = app.add_subcommand("list-experiments", "list experiments and CSV schemas");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are config errors
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, threads, allow_nonperturbative);
        if (est->parsed()) return cmd_estimate(dp);
        if (list->parsed()) cmd_list();
    } catch (const std::exception& e) {
        std::cerr << "crowsim: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
