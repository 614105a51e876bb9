#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lke/run.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The config file is applied before flag parsing so that explicit flags win.
std::string config_path_from(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    lke::RunConfig cfg;
    std::string cfg_path = config_path_from(argc, argv);
    if (!cfg_path.empty()) {
        try {
            cfg = lke::parse_config(slurp(cfg_path));
        } catch (const std::exception& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return lke::kExitConfig;
        }
    }

    CLI::App app{"Kinetic-equation dynamics of a long-range perturbed Ising chain"};
    app.set_help_flag("--help", "print this help message and exit");
    app.add_option("--config", cfg_path, "JSON config file; flags given here override its entries");
    app.add_option("--mode", cfg.mode, "evolve | ed | benchmark | thermal | correlate");
    app.add_option("-N,--N", cfg.model.N, "number of sites (even)");
    app.add_option("--h", cfg.model.h, "transverse field");
    app.add_option("--Jx", cfg.model.Jx, "Ising coupling");
    app.add_option("--Jz", cfg.model.Jz, "perturbation strength");
    app.add_option("--alpha", cfg.model.alpha, "perturbation range exponent");
    app.add_option("-T,--truncation", cfg.truncation, "operator basis scheme, e.g. T4 or T6p3");
    app.add_option("--state", cfg.state,
                   "initial state: psi:<n>, chi:<n>, vacuum, or "
                   "superposition:<re1>,<im1>,<re2>,<im2>:<n>");
    app.add_flag("--particle-hole,!--no-particle-hole", cfg.particle_hole,
                 "evolve in the particle-hole transformed frame");
    app.add_option("--t-max", cfg.traj.t_max, "integration end time");
    app.add_option("--dt", cfg.traj.dt, "integrator step");
    app.add_option("--sample-every", cfg.traj.sample_every, "steps between output samples");
    app.add_flag("--halving-check,!--no-halving-check", cfg.traj.halving_check,
                 "co-integrate at dt/2 and report the residual");
    app.add_flag("--quadratic-only,!--no-quadratic-only", cfg.quadratic_only,
                 "drop the quartic part of the Hamiltonian");
    app.add_option("--observables", cfg.observables, "any of sz, cx1, czz, energy")
        ->delimiter(',');
    app.add_option("--czz-m", cfg.czz_m, "zz correlator separations (default 0..N/2)")
        ->delimiter(',');
    app.add_option("--beta-grid", cfg.beta_grid, "inverse temperatures for thermal mode")
        ->delimiter(',');
    app.add_option("--benchmark-truncations", cfg.benchmark_truncations,
                   "schemes compared in benchmark mode")
        ->delimiter(',');
    app.add_option("-o,--output", cfg.output, "output CSV path");
    app.add_option("--metadata", cfg.metadata, "metadata JSON path (default <output>.meta.json)");
    app.add_option("--workers", cfg.workers, "reserved; must not affect results");
    bool print_config = false;
    app.add_flag("--print-config", print_config, "print the effective config as JSON and exit");

    auto add_mode = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
        sub->parse_complete_callback([&cfg, name] { cfg.mode = name; });
        return sub;
    };
    add_mode("evolve", "integrate the kinetic equations and record observables")->alias("lke");
    add_mode("ed", "exact reference trajectory on the full Hilbert space");
    add_mode("benchmark", "compare truncation schemes against the exact reference");
    add_mode("thermal", "thermal expansion coefficients and exact traces");
    add_mode("correlate", "kinetic run focused on the zz correlator profile");
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : lke::kExitConfig;
    }

    if (print_config) {
        std::printf("%s\n", lke::serialize_config(cfg).c_str());
        return lke::kExitOk;
    }
    return lke::run(cfg);
}
