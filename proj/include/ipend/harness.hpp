#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipend/hybrid.hpp"
#include "ipend/linear.hpp"
#include "ipend/mlp.hpp"
#include "ipend/plant.hpp"

namespace ipend {

enum class ScenarioKind { kZeroIc, kOffsetIc, kSquareLow, kSquareHigh, kCustom };
enum class ControllerKind { kLqg, kNeural, kHybrid };

const char* to_string(ScenarioKind kind);
const char* to_string(ControllerKind kind);

struct Scenario {
    ScenarioKind kind = ScenarioKind::kZeroIc;
    PlantState initial;        // used by kCustom only
    double frequency = 0.0;    // (Hz) square kinds
    double amplitude = 0.0;    // (m) square kinds
    double duration = 100.0;   // (s)
    std::uint64_t seed = 0;
    double zero_ic_mag = 0.01; // |p|, |theta| bound of the seeded kZeroIc draw
    double offset_p = 0.15;    // (m) kOffsetIc initial cart position
};

// Everything a closed-loop run needs besides the controller itself.
struct SimSetup {
    PlantParams plant;
    SensorModel sensors;
    LqgDesign lqg;            // carries the control period Ts
    double plant_dt = 0.001;  // (s) integrator step; Ts must be a multiple
};

// One logged control step (the CSV row).
struct TrajectorySample {
    double t = 0.0;
    double p = 0.0, p_dot = 0.0, theta = 0.0, theta_dot = 0.0;
    double p_hat = 0.0, pdot_hat = 0.0, theta_hat = 0.0, thetadot_hat = 0.0;
    double p_meas = 0.0, theta_meas = 0.0;
    double r = 0.0;
    double voltage = 0.0;
    int active = 0;  // 0 = LQG, 1 = NEURAL
};

struct RunResult {
    ScenarioKind scenario = ScenarioKind::kZeroIc;
    ControllerKind controller = ControllerKind::kLqg;
    std::uint64_t seed = 0;
    std::vector<TrajectorySample> samples;  // one per control period
    double pos_rms = 0.0;    // (m), against the reference
    double angle_rms = 0.0;  // (deg)
    std::vector<SwitchEvent> events;
    bool survived = true;
    double failure_time = 0.0;  // = duration when survived
};

// Setpoint at time t: 0 for the balancing kinds; square kinds give +amp
// while frac(t*f) < 0.5 and -amp otherwise (starts high at t = 0).
double reference_signal(const Scenario& sc, double t);

// pos_rms = sqrt(mean((p - r)^2)), angle_rms = sqrt(mean(theta^2)) in
// degrees, over all samples. Throws MetricError on an empty log.
std::pair<double, double> compute_rms(const std::vector<TrajectorySample>& samples);

// Full closed-loop run at the control period. Initial state: kZeroIc draws
// |p|, |theta| <= zero_ic_mag (uniform, seeded); kOffsetIc starts at
// p = offset_p; square kinds start at the origin; kCustom uses sc.initial.
// kNeural requires `neural`; kHybrid requires `neural` and `switching`
// (ConfigError otherwise). Plant blowup or a hard-limit violation marks the
// run failed at that time — never thrown. Deterministic in (sc, configs).
RunResult run_experiment(const Scenario& sc, ControllerKind controller, const SimSetup& sim,
                         const std::optional<MlpWeights>& neural = std::nullopt,
                         const std::optional<SwitchConfig>& switching = std::nullopt);

// Trajectory CSV, exact column order:
// t,p,p_dot,theta,theta_dot,p_hat,pdot_hat,theta_hat,thetadot_hat,
// p_meas,theta_meas,r,voltage,active — 12 significant digits, header row.
void write_trajectory_csv(const std::vector<TrajectorySample>& samples,
                          const std::filesystem::path& path);
std::vector<TrajectorySample> load_trajectory_csv(const std::filesystem::path& path);

// Reference-relative estimate vectors (p_hat - r, pdot_hat, theta_hat,
// thetadot_hat) — the calibration input.
std::vector<Eigen::Vector4d> relative_estimates(const std::vector<TrajectorySample>& samples);

// Rebuild a RunResult from a bare sample log (e.g. a loaded CSV): RMS from
// the samples, events from active-flag transitions, survival by comparing
// the sample count against duration/Ts.
RunResult summarize_samples(ScenarioKind scenario, ControllerKind controller,
                            std::vector<TrajectorySample> samples, double duration, double Ts);

// Table-2-shaped aggregation: per (controller in {LQG, HYBRID}) x (the four
// published scenarios), averaged over the provided repeats.
struct Table2Cell {
    int runs = 0;
    double pos_rms = 0.0;         // mean over runs (m)
    double angle_rms = 0.0;       // mean over runs (deg)
    double mean_events = 0.0;     // switch events per run
    double neural_fraction = 0.0; // mean fraction of samples under NEURAL
    bool all_survived = true;
};

struct Table2Report {
    Table2Cell cells[2][4];  // [controller: 0 LQG, 1 HYBRID][scenario]
    std::string text;        // human-readable grid
    std::string csv;         // machine-readable rows
};

// Groups runs by (controller, scenario); every one of the 8 cells must be
// populated or MetricError names the missing cell. kNeural runs are ignored.
Table2Report report_table2(const std::vector<RunResult>& runs);

}  // namespace ipend
