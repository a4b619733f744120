#include "contractionkit/commands.hpp"
#include "contractionkit/runconfig.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr const char* kFooter = R"(Exit codes:
  0  analysis ran, verdict positive
  1  usage, config, or runtime error
  2  analysis ran, verdict negative

Output files (under --out or outputs.dir):
  certify         certificate.json    weight matrices (row-major), mu_sup, verdict
  counterexample  witness.json        condition margins and the indefinite point
  simulate        trajectory.csv      columns: t, norm, phi, clamps (cumulative)
  sweep           sweep.csv           columns: index, <axis params...>, mu_sup,
                                      diffusion_ok, diffusion_lambda_min, verdict
                                      [, fitted_rate, bound_ok, clamps]

Reals in CSV files carry 17 significant digits; identical configs and seeds give
byte-identical outputs. CONTRACTIONKIT_LOG=quiet|info|debug controls stderr logging.)";

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the JSON run configuration")
        ->required();
    cmd->add_option("--out", args.out_dir, "Output directory (overrides outputs.dir)");
    cmd->add_option("--seed", args.seed, "Seed override for sweeps and simulations");
    cmd->add_option("--jobs", args.jobs, "Parallel workers for sweeps")
        ->check(CLI::PositiveNumber);
}

int dispatch(const CommonArgs& args,
             int (*command)(const contractionkit::RunConfig&,
                            const contractionkit::CliOverrides&)) {
    try {
        const contractionkit::RunConfig config =
            contractionkit::load_run_config(args.config_path);
        contractionkit::CliOverrides overrides;
        if (args.seed >= 0) {
            overrides.seed = static_cast<std::uint64_t>(args.seed);
        }
        if (!args.out_dir.empty()) {
            overrides.out_dir = args.out_dir;
        }
        overrides.jobs = args.jobs;
        return command(config, overrides);
    } catch (const contractionkit::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return contractionkit::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return contractionkit::kExitError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contractionkit — contraction certificates and simulations for "
                 "reaction-diffusion networks"};
    app.footer(kFooter);
    app.require_subcommand(1);

    CommonArgs certify_args;
    CLI::App* certify = app.add_subcommand(
        "certify", "Sweep sup mu_{2,P}(J_F) over the domain and check QD + DQ > 0");
    add_common(certify, certify_args);

    CommonArgs counter_args;
    CLI::App* counterexample = app.add_subcommand(
        "counterexample",
        "Check the measure-comparison conditions and search for an indefinite point");
    add_common(counterexample, counter_args);

    CommonArgs simulate_args;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Integrate a trajectory pair and verify the decay envelope");
    add_common(simulate, simulate_args);

    CommonArgs sweep_args;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Run certify (and optionally simulate) over a parameter grid");
    add_common(sweep, sweep_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : contractionkit::kExitError;
    }

    if (certify->parsed()) {
        return dispatch(certify_args, contractionkit::cmd_certify);
    }
    if (counterexample->parsed()) {
        return dispatch(counter_args, contractionkit::cmd_counterexample);
    }
    if (simulate->parsed()) {
        return dispatch(simulate_args, contractionkit::cmd_simulate);
    }
    if (sweep->parsed()) {
        return dispatch(sweep_args, contractionkit::cmd_sweep);
    }
    return contractionkit::kExitError;
}
