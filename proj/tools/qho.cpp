#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qho/app/commands.hpp"
#include "qho/app/run_config.hpp"
#include "qho/errors.hpp"

using namespace qho;
using namespace qho::app;

int main(int argc, char** argv) {
    CLI::App cli{"Periodic position measurements of a quantum harmonic oscillator"};
    cli.require_subcommand(1);
    cli.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    double tau_m = 0, varsigma_m = 0, t_m = 0, sigma_m = 0, omega = 0, mass = 0, hbar = 0, jitter = 0;
    double x0 = 0, sigma_x0 = 0, half_extent = 0, gap_threshold = 0, gap_ratio = 0;
    long n = 0, snapshots = 0, gap_steps = 0;
    std::size_t grid_points = 0;
    int steps_per_period = 0;
    std::string engine, collapse, out, varsigma_axis, tau_axis;

    cli.add_option("--config", config_path, "JSON config file (an output summary with a config echo also works)")
        ->check(CLI::ExistingFile);
    auto* o_seed = cli.add_option("--seed", seed, "RNG seed; falls back to the config, then QHO_SEED, then 1");
    auto* o_tau = cli.add_option("--tau-m", tau_m, "measurement period in units of the oscillator period");
    auto* o_t = cli.add_option("--t-m", t_m, "measurement period");
    auto* o_vs = cli.add_option("--varsigma-m", varsigma_m, "instrument width in units of sigma_gs");
    auto* o_s = cli.add_option("--sigma-m", sigma_m, "instrument width");
    auto* o_omega = cli.add_option("--omega", omega, "angular frequency");
    auto* o_mass = cli.add_option("--mass", mass, "particle mass");
    auto* o_hbar = cli.add_option("--hbar", hbar, "reduced Planck constant");
    auto* o_n = cli.add_option("--n", n, "number of measurements");
    auto* o_jitter = cli.add_option("--jitter-std", jitter, "std of the per-period timing jitter");
    auto* o_engine = cli.add_option("--engine", engine, "simulation engine")->check(CLI::IsMember({"chain", "grid"}));
    auto* o_collapse =
        cli.add_option("--collapse", collapse, "grid collapse model")->check(CLI::IsMember({"replace", "weak"}));
    auto* o_out = cli.add_option("--out", out, "output directory");
    auto* o_x0 = cli.add_option("--x0", x0, "initial packet centre");
    auto* o_sx0 = cli.add_option("--sigma-x0", sigma_x0, "initial packet width");
    auto* o_points = cli.add_option("--grid-points", grid_points, "grid points (power of two, >= 256)");
    auto* o_extent = cli.add_option("--grid-half-extent", half_extent, "grid half extent");
    auto* o_spp = cli.add_option("--steps-per-period", steps_per_period, "split-operator steps per period");
    auto* o_snap = cli.add_option("--snapshot-every", snapshots, "write grid densities every k-th measurement");
    auto* o_vaxis = cli.add_option("--varsigma-axis", varsigma_axis, "sweep axis min:max:count[:lin|log] or a value");
    auto* o_taxis = cli.add_option("--tau-axis", tau_axis, "sweep axis min:max:count[:lin|log] or a value");
    auto* o_gap = cli.add_option("--weak-gap-threshold", gap_threshold, "tolerated Replace/WeakProduct std gap");
    auto* o_ratio = cli.add_option("--weak-gap-ratio", gap_ratio, "sigma_M / sigma(t_M) for the weak-gap audit");
    auto* o_gap_steps = cli.add_option("--weak-gap-steps", gap_steps, "chain length for the weak-gap audit");

    auto* analyze = cli.add_subcommand("analyze", "closed-form limiting distribution and optimum");
    auto* simulate = cli.add_subcommand("simulate", "run a measurement chain and write CSV/JSON outputs");
    auto* sweep = cli.add_subcommand("sweep", "tabulate varsigma_inf over varsigma_M and tau_M");
    auto* validate = cli.add_subcommand("validate", "run the cross-check batteries");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if ((*o_tau && *o_t) || (*o_vs && *o_s)) {
            throw ConfigError("give exactly one of --tau-m/--t-m and one of --varsigma-m/--sigma-m");
        }
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
        if (*o_seed) cfg.seed = seed;
        if (*o_tau) cfg.set_tau_M(tau_m);
        if (*o_t) cfg.set_t_M(t_m);
        if (*o_vs) cfg.set_varsigma_M(varsigma_m);
        if (*o_s) cfg.set_sigma_M(sigma_m);
        if (*o_omega) cfg.omega = omega;
        if (*o_mass) cfg.mass = mass;
        if (*o_hbar) cfg.hbar = hbar;
        if (*o_n) cfg.n_measurements = n;
        if (*o_jitter) cfg.jitter_std = jitter;
        if (*o_engine) cfg.engine = engine == "chain" ? Engine::Chain : Engine::Grid;
        if (*o_collapse) cfg.collapse = collapse == "replace" ? CollapseMode::Replace : CollapseMode::WeakProduct;
        if (*o_out) cfg.out = out;
        if (*o_x0) cfg.x0 = x0;
        if (*o_sx0) cfg.sigma_x0 = sigma_x0;
        if (*o_points) cfg.grid_points = grid_points;
        if (*o_extent) cfg.grid_half_extent = half_extent;
        if (*o_spp) cfg.steps_per_period = steps_per_period;
        if (*o_snap) cfg.snapshot_every = snapshots;
        if (*o_vaxis) cfg.varsigma_axis = AxisSpec::parse(varsigma_axis);
        if (*o_taxis) cfg.tau_axis = AxisSpec::parse(tau_axis);
        if (*o_gap) cfg.weak_gap_threshold = gap_threshold;
        if (*o_ratio) cfg.weak_gap_ratio = gap_ratio;
        if (*o_gap_steps) cfg.weak_gap_steps = gap_steps;
        cfg = resolve(cfg);

        if (analyze->parsed()) {
            std::cout << cmd_analyze(cfg).dump(2) << '\n';
        } else if (simulate->parsed()) {
            const auto summary = cmd_simulate(cfg);
            std::cout << "std " << summary["std"] << " sigma_inf " << summary["sigma_inf"] << " rel_err "
                      << summary["rel_err"] << " -> " << cfg.out << '\n';
        } else if (sweep->parsed()) {
            const auto summary = cmd_sweep(cfg);
            std::cout << summary["cells"] << " cells " << summary["flags"] << " -> " << cfg.out << '\n';
        } else if (validate->parsed()) {
            const auto report = cmd_validate(cfg);
            for (const auto& c : report["checks"]) {
                std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
                          << " measured=" << c["measured"] << " tolerance=" << c["tolerance"];
                if (!c["passed"].get<bool>()) std::cout << " (" << c["detail"].get<std::string>() << ")";
                std::cout << '\n';
            }
            return report["passed"].get<bool>() ? kExitOk : kExitValidationFailed;
        }
        return kExitOk;
    } catch (...) {
        return report_exception(std::cerr);
    }
}
