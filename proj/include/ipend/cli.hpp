#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "ipend/config.hpp"

namespace ipend::cli {

// Flags shared by every subcommand. All artifacts live under out_dir.
struct CommonOptions {
    std::optional<std::filesystem::path> config_path;  // absent = defaults
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;  // overrides the config's master seed
};

struct RunOptions {
    std::string scenario;    // zero_ic | offset_ic | square_low | square_high
    std::string controller;  // lqg | neural | hybrid
    int repeat = 1;          // seeded repeats (file suffix _r<k> when > 1)
    std::optional<double> duration;  // override (s), e.g. calibration logs
    std::string tag;         // output name override (single repeat only)
    std::optional<std::filesystem::path> genome;  // default out/genome.txt
    std::optional<std::filesystem::path> nhc;     // default out/lqg_steady.region
    std::optional<std::filesystem::path> lhc;     // default out/neural_steady.region
};

// Config file (or defaults) + --seed override, validated.
Config load(const CommonOptions& common);

// Each command returns a process exit code (0 = success) and writes its
// artifacts under out_dir; human-readable summaries go to `out`. Library
// errors (ipend::Error) propagate — the binary turns them into exit 1.
int cmd_design(const CommonOptions& common, std::ostream& out);
int cmd_train(const CommonOptions& common, std::ostream& out);
int cmd_calibrate(const CommonOptions& common, const std::filesystem::path& trajectory_csv,
                  std::ostream& out);
int cmd_run(const CommonOptions& common, const RunOptions& options, std::ostream& out);
int cmd_report(const CommonOptions& common, std::ostream& out);
int cmd_sweep(const CommonOptions& common, std::ostream& out);
int cmd_config(const CommonOptions& common, std::ostream& out);

// Name <-> enum helpers shared with the binary's argument checks.
ScenarioKind parse_scenario(const std::string& name);
ControllerKind parse_controller(const std::string& name);

}  // namespace ipend::cli
