#include "ipend/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "ipend/errors.hpp"

namespace ipend {

SwitchConfig make_switch_config(const Hypercube& omega_nhc, const Hypercube& omega_lhc,
                                const Hypercube& omega_safe, double t_sw, double lhc_margin) {
    validate(omega_nhc, "switch.omega_nhc");
    validate(omega_lhc, "switch.omega_lhc");
    validate(omega_safe, "switch.omega_safe");
    if (std::isnan(t_sw) || t_sw < 0.0) {
        throw ConfigError("switch.t_sw: must be nonnegative (infinity allowed)");
    }
    if (!(lhc_margin >= 1.0) || !std::isfinite(lhc_margin)) {
        throw ConfigError("switch.lhc_margin: must be finite and >= 1");
    }
    if (!is_subset(omega_nhc, omega_safe)) {
        throw ConfigError("switch.omega_nhc: not a subset of the safe region");
    }
    if (!is_subset(omega_lhc, omega_safe)) {
        throw ConfigError("switch.omega_lhc: not a subset of the safe region");
    }
    SwitchConfig cfg;
    cfg.omega_nhc = omega_nhc;
    // The trusted region must cover every state the network can be handed:
    // switches happen inside Omega_NHC, so a trusted box smaller than the
    // entry box would eject the network moments after each handover. Build
    // it as the envelope of both calibrated boxes, inflated by the margin to
    // absorb the catch transient (the cart travels a braking distance after
    // taking over mid-sweep), then clamp so Eq. (3) containment still holds.
    cfg.omega_lhc = clamp_to(inflate(envelope(omega_lhc, omega_nhc), lhc_margin), omega_safe);
    cfg.t_sw = t_sw;
    return cfg;
}

void switch_step(SwitchState& s, const SwitchConfig& cfg, const Eigen::Vector4d& x_hat,
                 double r, double dt) {
    if (!(dt > 0.0)) {
        throw SimulationError("switch_step: dt must be positive");
    }
    if (s.active == ActiveController::kLqg) {
        if (contains(cfg.omega_nhc, x_hat, r)) {
            s.dwell_elapsed = std::min(s.dwell_elapsed + dt, cfg.t_sw);
            if (s.dwell_elapsed >= cfg.t_sw && contains(cfg.omega_lhc, x_hat, r)) {
                s.active = ActiveController::kNeural;
                s.events.push_back({s.clock, ActiveController::kLqg, ActiveController::kNeural});
                s.dwell_elapsed = 0.0;
            }
        } else {
            s.dwell_elapsed = 0.0;
        }
    } else {
        if (!contains(cfg.omega_lhc, x_hat, r)) {
            s.active = ActiveController::kLqg;
            s.events.push_back({s.clock, ActiveController::kNeural, ActiveController::kLqg});
            s.dwell_elapsed = 0.0;
        }
    }
    s.clock += dt;
}

double hybrid_control(const LqgDesign& design, const PlantParams& params, HybridRuntime& rt,
                      const Measurement& y, double r) {
    kalman_update(design, rt.lqg, y);
    switch_step(rt.sw, rt.config, rt.lqg.x_hat, r, design.model.Ts);
    const double voltage = rt.sw.active == ActiveController::kLqg
        ? lqg_voltage(design, params, rt.lqg.x_hat, r)
        : mlp_forward(rt.neural, rt.lqg.x_hat, r);
    rt.lqg.u_prev = voltage - params.voltage_mid;
    return voltage;
}

}  // namespace ipend
