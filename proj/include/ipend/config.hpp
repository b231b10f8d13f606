#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ipend/evolve.hpp"
#include "ipend/harness.hpp"
#include "ipend/linear.hpp"
#include "ipend/plant.hpp"

namespace ipend {

// Switching supervisor settings; the regions themselves come from region
// files produced by `calibrate`.
struct SwitchSettings {
    double t_sw = 0.5;          // dwell (s); inf disables switching
    // Inflation applied to the trusted-region envelope before the subset
    // clamp. 1.5x leaves room for the catch transient after a handover
    // (braking distance for the cart, a few hundredths of a radian for the
    // rod); 1.0 would eject the network the moment it overshoots the box it
    // was handed control in.
    double lhc_margin = 1.5;
    double coverage = 0.99;     // calibration quantile coverage
    double calibration_duration = 1000.0;  // (s) steady-state log length
};

struct ScenarioDefaults {
    double duration = 100.0;       // (s)
    double square_amplitude = 0.15;  // (m)
    double freq_low = 0.05;        // (Hz)
    double freq_high = 0.5;        // (Hz)
    int repeats = 5;               // seeded repeats averaged by `report`
    double zero_ic_mag = 0.01;     // |p|, |theta| bound of the balancing IC
    double offset_p = 0.15;        // (m) offset-start experiment
};

// The whole laboratory: plant, sensors, controller synthesis, training,
// switching, and experiment defaults. A default-constructed Config is the
// reference setup every experiment is defined against.
struct Config {
    PlantParams plant;
    // offsets 0; half-millimeter-ish quantization and 1 mm / 1 mrad noise
    SensorModel sensors{0.0, 0.0, 5e-4, 5e-4, 1e-3, 1e-3};
    LqgWeights lqg;
    double lqg_ts = 0.01;    // (s) control period
    double plant_dt = 0.001; // (s) integrator step
    GaConfig ga;
    FitnessConfig fitness;
    SafeRegion safe;
    SwitchSettings sw;
    ScenarioDefaults scenario;
    std::uint64_t seed = 12345;  // master seed; --seed overrides
};

// Line-oriented "key = value" format under [section] headers; '#' starts a
// comment; keys outside any section are global (currently just "seed").
// Unknown keys and malformed lines are ConfigErrors carrying the line
// number; invariant violations carry the field path. The safe box is
// configured by half-widths (symmetric about the regulation point).
Config parse_config(const std::string& text);
Config load_config_file(const std::filesystem::path& path);

// Inverse of parse_config; 17-significant-digit doubles, so
// parse(serialize(c)) == c exactly.
std::string serialize_config(const Config& config);

// serialize_config of a default Config, with a usage banner — the
// documented reference for every available key.
std::string reference_config();

// Every field checked against its owning module's invariants; throws
// ConfigError with the field path.
void validate(const Config& config);

// LQG synthesis + integrator settings ready for run_experiment.
SimSetup make_sim_setup(const Config& config);

// Scenario for one of the published experiments (kCustom gets zeros and the
// default duration; fill its initial state yourself).
Scenario make_scenario(const Config& config, ScenarioKind kind, std::uint64_t seed);

}  // namespace ipend
