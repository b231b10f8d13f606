#pragma once

#include <vector>

#include "ipend/hypercube.hpp"
#include "ipend/linear.hpp"
#include "ipend/mlp.hpp"

namespace ipend {

enum class ActiveController { kLqg = 0, kNeural = 1 };

struct SwitchEvent {
    double t = 0.0;  // supervisor clock (s)
    ActiveController from = ActiveController::kLqg;
    ActiveController to = ActiveController::kNeural;
};

// Validated switching regions + dwell. Build through make_switch_config.
struct SwitchConfig {
    Hypercube omega_nhc;  // LQG steady-state box: entry region (with dwell)
    Hypercube omega_lhc;  // neural trust box: exit on departure
    double t_sw = 0.5;    // dwell (s); +infinity disables switching
};

// Supervisor state machine. Starts on LQG (the system boots far from the
// setpoint, under the SAFE controller).
struct SwitchState {
    ActiveController active = ActiveController::kLqg;
    double dwell_elapsed = 0.0;  // capped at t_sw; meaningful under LQG
    double clock = 0.0;          // local time (s), event timestamps
    std::vector<SwitchEvent> events;
};

struct HybridRuntime {
    LqgRuntime lqg;      // shared estimator + LQG memory
    MlpWeights neural;
    SwitchConfig config;
    SwitchState sw;
};

// Validates both raw calibrated boxes against omega_safe (subset required —
// a steady-state box escaping the safe set means the calibration data is
// unusable), then inflates omega_lhc by lhc_margin about its center and
// clamps it back inside omega_safe, so the returned config satisfies the
// containment requirement by construction. Throws ConfigError on any
// violation (naming the region), on lhc_margin < 1, or on t_sw < 0
// (t_sw = +infinity is allowed and disables switching).
SwitchConfig make_switch_config(const Hypercube& omega_nhc, const Hypercube& omega_lhc,
                                const Hypercube& omega_safe, double t_sw, double lhc_margin);

// One supervisor tick, dt > 0:
//  - LQG active: inside omega_nhc the dwell accumulates (capped at t_sw),
//    else it resets to zero. Control hands over to NEURAL once dwell >= t_sw
//    *and* the state is already inside omega_lhc — switching into a state
//    the neural box disowns would bounce straight back.
//  - NEURAL active: leaves omega_lhc -> back to LQG immediately, dwell 0.
// Events are stamped with the clock at the start of the tick, then the
// clock advances by dt.
void switch_step(SwitchState& s, const SwitchConfig& cfg, const Eigen::Vector4d& x_hat,
                 double r, double dt);

// One hybrid control step at the design's period: shared Kalman update,
// supervisor tick on the fresh estimate, then the active controller's law.
// Returns the drive voltage; rt.sw.active tells which controller produced it.
double hybrid_control(const LqgDesign& design, const PlantParams& params, HybridRuntime& rt,
                      const Measurement& y, double r);

}  // namespace ipend
