#include "sdwave/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace sdwave::cli;

    CLI::App app{"Strongly damped semilinear wave lab: simulate, sweep, certify weights, fit scaling laws"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run one simulation from a JSON config");
    simulate->add_option("--config", sim.config, "Run config (JSON)")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_flag("--allow-array-data", sim.allow_array_data, "Accept raw nodal arrays as initial data");

    SweepOptions sw;
    auto* sweep = app.add_subcommand("sweep", "Phase table over p and data amplitude");
    sweep->add_option("--config", sw.config, "Sweep spec (JSON)")->required();
    sweep->add_option("--out", sw.out, "Output directory")->required();
    sweep->add_option("--jobs", sw.jobs, "Concurrent rows")->check(CLI::PositiveNumber);
    sweep->add_flag("--allow-array-data", sw.allow_array_data, "Accept raw nodal arrays as initial data");

    WeightsOptions wo;
    double r_max = 0.0;
    auto* weights = app.add_subcommand("weights", "Certify the harmonic weight on three refinements");
    weights->add_option("--dim", wo.dim, "Space dimension")->required();
    weights->add_option("--r0", wo.r0, "Obstacle radius (0 for dim 1)")->required();
    weights->add_option("--cells", wo.cells, "Cells on the coarsest grid")->required();
    auto* r_max_opt = weights->add_option("--r-max", r_max, "Truncation radius (default 10 max(1, r0))");
    weights->add_option("--out", wo.out, "Output directory")->required();

    ScalingOptions sc;
    auto* scaling = app.add_subcommand("scaling", "Cut-off integrals and slope fit over a T ladder");
    scaling->add_option("--config", sc.config, "Run config (JSON)")->required();
    scaling->add_option("--ladder", sc.ladder, "Comma-separated T values, e.g. 8,16,32,64");
    scaling->add_option("--out", sc.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ConfigError;
    }

    if (*simulate) return cmd_simulate(sim, std::cout);
    if (*sweep) return cmd_sweep(sw, std::cout);
    if (*weights) {
        if (*r_max_opt) wo.r_max = r_max;
        return cmd_weights(wo, std::cout);
    }
    return cmd_scaling(sc, std::cout);
}
