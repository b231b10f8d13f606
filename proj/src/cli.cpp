#include "ipend/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ipend/errors.hpp"
#include "ipend/evolve.hpp"
#include "ipend/harness.hpp"
#include "ipend/hybrid.hpp"
#include "ipend/mlp.hpp"
#include "ipend/rng.hpp"

namespace ipend::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out << text;
    if (!out.flush()) throw IoError("failed writing file: " + path.string());
}

std::uint64_t scenario_index(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::kZeroIc: return 0;
        case ScenarioKind::kOffsetIc: return 1;
        case ScenarioKind::kSquareLow: return 2;
        case ScenarioKind::kSquareHigh: return 3;
        case ScenarioKind::kCustom: return 4;
    }
    return 4;
}

// The seed of repeat `rep` of a scenario — shared by all controllers so
// LQG/hybrid comparisons (and the dwell = infinity identity) see identical
// noise.
std::uint64_t run_seed(const Config& config, ScenarioKind kind, int rep) {
    return RngStream(config.seed)
        .derive("run", {scenario_index(kind), static_cast<std::uint64_t>(rep)})
        .base_seed();
}

std::string describe_run(const RunResult& run) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s/%s seed=%llu pos_rms=%.4f m angle_rms=%.3f deg events=%zu %s",
                  to_string(run.scenario), to_string(run.controller),
                  static_cast<unsigned long long>(run.seed), run.pos_rms, run.angle_rms,
                  run.events.size(),
                  run.survived ? "survived"
                               : ("FAILED at t=" + std::to_string(run.failure_time)).c_str());
    return buf;
}

}  // namespace

ScenarioKind parse_scenario(const std::string& name) {
    if (name == "zero_ic") return ScenarioKind::kZeroIc;
    if (name == "offset_ic") return ScenarioKind::kOffsetIc;
    if (name == "square_low") return ScenarioKind::kSquareLow;
    if (name == "square_high") return ScenarioKind::kSquareHigh;
    throw ConfigError("unknown scenario '" + name +
                      "' (expected zero_ic | offset_ic | square_low | square_high)");
}

ControllerKind parse_controller(const std::string& name) {
    if (name == "lqg") return ControllerKind::kLqg;
    if (name == "neural") return ControllerKind::kNeural;
    if (name == "hybrid") return ControllerKind::kHybrid;
    throw ConfigError("unknown controller '" + name + "' (expected lqg | neural | hybrid)");
}

Config load(const CommonOptions& common) {
    Config config = common.config_path ? load_config_file(*common.config_path) : Config{};
    if (common.seed) config.seed = *common.seed;
    validate(config);
    return config;
}

int cmd_design(const CommonOptions& common, std::ostream& out) {
    const Config config = load(common);
    const SimSetup sim = make_sim_setup(config);
    const LqgDesign& d = sim.lqg;

    std::ostringstream text;
    char buf[256];
    text << "LQG synthesis (Ts = " << d.model.Ts << " s)\n";
    std::snprintf(buf, sizeof buf, "K = [%.12g, %.12g, %.12g, %.12g]\n", d.K(0), d.K(1), d.K(2),
                  d.K(3));
    text << buf;
    for (int i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof buf, "L[%d] = [%.12g, %.12g]\n", i, d.L(i, 0), d.L(i, 1));
        text << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "closed-loop spectral radius = %.12g\n"
                  "estimator   spectral radius = %.12g\n"
                  "controller DARE residual = %.3g\n"
                  "estimator  DARE residual = %.3g\n",
                  d.rho_closed_loop, d.rho_estimator, d.dare_residual, d.kalman_residual);
    text << buf;

    fs::create_directories(common.out_dir);
    write_text(common.out_dir / "design.txt", text.str());
    out << text.str();
    return 0;
}

int cmd_train(const CommonOptions& common, std::ostream& out) {
    const Config config = load(common);
    const SimSetup sim = make_sim_setup(config);
    const TrainingResult trained =
        evolve(config.ga, config.fitness, config.safe, sim, config.seed);

    fs::create_directories(common.out_dir);
    save_genome(trained.best, common.out_dir / "genome.txt");

    std::ostringstream csv;
    csv << "generation,best_f,mean_f,survival_rate\n";
    char buf[256];
    for (const GenerationStats& g : trained.generations) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", g.generation, g.best_f,
                      g.mean_f, g.survival_rate);
        csv << buf;
    }
    write_text(common.out_dir / "training.csv", csv.str());

    std::ostringstream report;
    std::snprintf(buf, sizeof buf,
                  "training: %d generations, population %d, seed %llu\n"
                  "best F = %.6g (genome id %d)\n"
                  "best genome eval: survived=%s exit_time=%.2f s pos_rms=%.4f m "
                  "angle_rms=%.3f deg\n"
                  "bang-bang fraction (|V - %.2g V| > 2 V) = %.4f\n",
                  config.ga.generations, config.ga.population,
                  static_cast<unsigned long long>(config.seed), trained.best_record.fitness,
                  trained.best_record.genome_id, trained.best_record.survived ? "yes" : "no",
                  trained.best_record.exit_time, trained.best_record.pos_rms,
                  trained.best_record.angle_rms, config.plant.voltage_mid,
                  trained.bang_bang_fraction);
    report << buf;
    write_text(common.out_dir / "training_report.txt", report.str());
    out << report.str();
    return 0;
}

int cmd_calibrate(const CommonOptions& common, const std::filesystem::path& trajectory_csv,
                  std::ostream& out) {
    const Config config = load(common);
    const auto samples = load_trajectory_csv(trajectory_csv);
    RegionFile region;
    region.cube = calibrate_region(relative_estimates(samples), config.sw.coverage);
    region.coverage = config.sw.coverage;
    region.source = trajectory_csv.filename().string();

    fs::create_directories(common.out_dir);
    const fs::path out_path = common.out_dir / (trajectory_csv.stem().string() + ".region");
    save_region(region, out_path);

    out << "calibrated " << out_path.string() << " from " << samples.size() << " samples:\n";
    static const char* names[4] = {"p       ", "p_dot   ", "theta   ", "theta_dot"};
    char buf[128];
    for (int i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof buf, "  %s [%.6g, %.6g]\n", names[i], region.cube.lo[i],
                      region.cube.hi[i]);
        out << buf;
    }
    return 0;
}

int cmd_run(const CommonOptions& common, const RunOptions& options, std::ostream& out) {
    const Config config = load(common);
    const ScenarioKind kind = parse_scenario(options.scenario);
    const ControllerKind controller = parse_controller(options.controller);
    if (options.repeat < 1) throw ConfigError("run: --repeat must be at least 1");
    if (!options.tag.empty() && options.repeat != 1) {
        throw ConfigError("run: --tag requires a single repeat");
    }

    const SimSetup sim = make_sim_setup(config);
    std::optional<MlpWeights> neural;
    std::optional<SwitchConfig> switching;
    if (controller != ControllerKind::kLqg) {
        const fs::path genome_path =
            options.genome.value_or(common.out_dir / "genome.txt");
        neural = decode_genome(load_genome(genome_path));
    }
    if (controller == ControllerKind::kHybrid) {
        const fs::path nhc_path = options.nhc.value_or(common.out_dir / "lqg_steady.region");
        const fs::path lhc_path = options.lhc.value_or(common.out_dir / "neural_steady.region");
        switching = make_switch_config(load_region(nhc_path).cube, load_region(lhc_path).cube,
                                       config.safe.box, config.sw.t_sw, config.sw.lhc_margin);
    }

    fs::create_directories(common.out_dir);
    for (int rep = 0; rep < options.repeat; ++rep) {
        Scenario sc = make_scenario(config, kind, run_seed(config, kind, rep));
        if (options.duration) sc.duration = *options.duration;
        const RunResult run = run_experiment(sc, controller, sim, neural, switching);

        std::string name = options.tag;
        if (name.empty()) {
            name = std::string("run_") + to_string(kind) + "_" + to_string(controller);
            if (options.repeat > 1) name += "_r" + std::to_string(rep);
        }
        const fs::path csv_path = common.out_dir / (name + ".csv");
        write_trajectory_csv(run.samples, csv_path);
        out << describe_run(run) << " -> " << csv_path.string() << "\n";
    }
    return 0;
}

int cmd_report(const CommonOptions& common, std::ostream& out) {
    const Config config = load(common);
    std::vector<RunResult> runs;
    constexpr ScenarioKind kScenarios[4] = {ScenarioKind::kZeroIc, ScenarioKind::kOffsetIc,
                                            ScenarioKind::kSquareLow, ScenarioKind::kSquareHigh};
    constexpr ControllerKind kControllers[2] = {ControllerKind::kLqg, ControllerKind::kHybrid};
    for (ScenarioKind sc : kScenarios) {
        for (ControllerKind ctrl : kControllers) {
            const std::string base =
                std::string("run_") + to_string(sc) + "_" + to_string(ctrl);
            std::vector<fs::path> files;
            if (fs::exists(common.out_dir / (base + ".csv"))) {
                files.push_back(common.out_dir / (base + ".csv"));
            }
            for (int k = 0;; ++k) {
                const fs::path p = common.out_dir / (base + "_r" + std::to_string(k) + ".csv");
                if (!fs::exists(p)) break;
                files.push_back(p);
            }
            if (files.empty()) {
                throw MetricError("report: no run CSVs found for " + base +
                                  " (run the experiments first)");
            }
            for (const fs::path& p : files) {
                runs.push_back(summarize_samples(sc, ctrl, load_trajectory_csv(p),
                                                 config.scenario.duration, config.lqg_ts));
            }
        }
    }
    const Table2Report report = report_table2(runs);
    write_text(common.out_dir / "table2.txt", report.text);
    write_text(common.out_dir / "table2.csv", report.csv);
    out << report.text;
    return 0;
}

int cmd_sweep(const CommonOptions& common, std::ostream& out) {
    const Config config = load(common);
    const SimSetup sim = make_sim_setup(config);
    const std::vector<std::pair<double, double>> pairs = {
        {0.5, 2.0}, {0.5, 1.0}, {0.5, 0.5}, {1.0, 0.5}, {2.0, 0.5}};
    const SweepReport report =
        sweep_table1(pairs, config.ga, config.fitness, config.safe, sim, config.seed);
    fs::create_directories(common.out_dir);
    write_text(common.out_dir / "table1.txt", report.text);
    write_text(common.out_dir / "table1.csv", report.csv);
    out << report.text;
    return 0;
}

int cmd_config(const CommonOptions& common, std::ostream& out) {
    (void)common;
    out << reference_config();
    return 0;
}

}  // namespace ipend::cli
