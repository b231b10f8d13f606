#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ipend/cli.hpp"
#include "ipend/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Inverted-pendulum laboratory: LQG, neuroevolution, hybrid switching"};
    app.require_subcommand(1);
    app.fallthrough();

    ipend::cli::CommonOptions common;
    std::string config_path;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "configuration file (defaults when omitted)");
    app.add_option("--out", common.out_dir, "artifact directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "master seed override");

    auto* design = app.add_subcommand("design", "synthesize the LQG controller and report it");
    auto* train = app.add_subcommand("train", "evolve the neural controller, save the genome");

    auto* calibrate =
        app.add_subcommand("calibrate", "build a switching region from a trajectory CSV");
    std::string calibrate_input;
    calibrate->add_option("csv", calibrate_input, "steady-state trajectory CSV")->required();

    auto* run = app.add_subcommand("run", "closed-loop experiment, trajectory CSV out");
    ipend::cli::RunOptions run_options;
    run->add_option("scenario", run_options.scenario, "experiment")
        ->required()
        ->check(CLI::IsMember({"zero_ic", "offset_ic", "square_low", "square_high"}));
    run->add_option("controller", run_options.controller, "controller")
        ->required()
        ->check(CLI::IsMember({"lqg", "neural", "hybrid"}));
    run->add_option("--repeat", run_options.repeat, "seeded repeats")->capture_default_str();
    double duration = 0.0;
    auto* duration_opt =
        run->add_option("--duration", duration, "override run length (s)");
    run->add_option("--tag", run_options.tag, "output file name override (single repeat)");
    std::string genome_path;
    std::string nhc_path;
    std::string lhc_path;
    run->add_option("--genome", genome_path, "genome file (default <out>/genome.txt)");
    run->add_option("--nhc", nhc_path, "entry region file (default <out>/lqg_steady.region)");
    run->add_option("--lhc", lhc_path, "exit region file (default <out>/neural_steady.region)");

    auto* report = app.add_subcommand("report", "aggregate run CSVs into the tracking table");
    auto* sweep = app.add_subcommand("sweep", "fitness-weight sweep with LQG comparison");
    auto* config_cmd = app.add_subcommand("config", "print the reference configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (!config_path.empty()) common.config_path = config_path;
    if (seed_opt->count() > 0) common.seed = seed;
    if (duration_opt->count() > 0) run_options.duration = duration;
    if (!genome_path.empty()) run_options.genome = genome_path;
    if (!nhc_path.empty()) run_options.nhc = nhc_path;
    if (!lhc_path.empty()) run_options.lhc = lhc_path;

    try {
        if (design->parsed()) return ipend::cli::cmd_design(common, std::cout);
        if (train->parsed()) return ipend::cli::cmd_train(common, std::cout);
        if (calibrate->parsed()) {
            return ipend::cli::cmd_calibrate(common, calibrate_input, std::cout);
        }
        if (run->parsed()) return ipend::cli::cmd_run(common, run_options, std::cout);
        if (report->parsed()) return ipend::cli::cmd_report(common, std::cout);
        if (sweep->parsed()) return ipend::cli::cmd_sweep(common, std::cout);
        if (config_cmd->parsed()) return ipend::cli::cmd_config(common, std::cout);
    } catch (const ipend::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
