#include <CLI11.hpp>

#include "qsurf/runner.hpp"

// qsurf: cross-sectional electrostatics for planar qubit designs.
// Subcommands run one workflow each against a declarative config file and
// write CSV tables, plot data, and a hashed manifest into --out.

int main(int argc, char** argv) {
    CLI::App app{"Surface-participation and loss-budget toolkit for planar qubit cross-sections"};
    app.require_subcommand(1);

    qsurf::runner::RunRequest request;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", request.config_path, "run configuration file")->required();
        cmd->add_option("--out", request.out_dir, "output directory")->required();
        cmd->add_option("--jobs", request.jobs, "parallel solves")->check(CLI::PositiveNumber);
        cmd->add_flag("--verbose", request.verbose, "progress to stderr");
    };
    add_common(app.add_subcommand("simulate", "single participation solve at one trench depth"));
    add_common(app.add_subcommand("sweep", "trench-depth sweep with logarithmic extrapolation"));
    add_common(app.add_subcommand("budget", "loss budget, T1/Q, bounds, Purcell estimate"));
    add_common(app.add_subcommand("compare", "participation and predicted Q across designs"));

    CLI11_PARSE(app, argc, argv);

    request.command = qsurf::config::parse_command(app.get_subcommands().front()->get_name());
    return qsurf::runner::run(request);
}
