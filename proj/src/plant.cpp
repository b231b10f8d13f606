#include "ipend/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipend/errors.hpp"

namespace ipend {

namespace {

double sign(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

double quantize(double x, double step) {
    if (step <= 0.0) return x;
    return std::round(x / step) * step;
}

}  // namespace

void validate(const PlantParams& params) {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(std::string("plant.") + field + ": " + what);
    };
    require(std::isfinite(params.cart_mass) && params.cart_mass > 0.0, "cart_mass",
            "must be strictly positive");
    require(std::isfinite(params.rod_mass) && params.rod_mass > 0.0, "rod_mass",
            "must be strictly positive");
    require(std::isfinite(params.rod_length) && params.rod_length > 0.0, "rod_length",
            "must be strictly positive");
    require(std::isfinite(params.gravity) && params.gravity > 0.0, "gravity",
            "must be strictly positive");
    require(std::isfinite(params.motor_gain) && params.motor_gain > 0.0, "motor_gain",
            "must be strictly positive");
    require(std::isfinite(params.dynamic_friction) && params.dynamic_friction >= 0.0,
            "dynamic_friction", "must be nonnegative");
    require(std::isfinite(params.static_friction) && params.static_friction >= 0.0,
            "static_friction", "must be nonnegative");
    require(std::isfinite(params.rail_half_length) && params.rail_half_length > 0.0,
            "rail_half_length", "must be strictly positive");
    require(std::isfinite(params.angle_limit) && params.angle_limit > 0.0 &&
                params.angle_limit < 1.5707963267948966,
            "angle_limit", "must lie in (0, pi/2)");
    require(std::isfinite(params.voltage_span) && params.voltage_span > 0.0, "voltage_span",
            "must be strictly positive");
    require(std::isfinite(params.dead_zone_volts) && params.dead_zone_volts >= 0.0 &&
                params.dead_zone_volts < params.voltage_span / 2.0,
            "dead_zone_volts", "must lie in [0, voltage_span/2)");
    require(std::isfinite(params.voltage_mid) && params.voltage_mid > 0.0 &&
                params.voltage_mid < params.voltage_span,
            "voltage_mid", "must lie inside (0, voltage_span)");
    require(std::isfinite(params.force_max) && params.force_max > 0.0, "force_max",
            "must be strictly positive");
}

void validate(const SensorModel& sensors) {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(std::string("sensors.") + field + ": " + what);
    };
    require(std::isfinite(sensors.offset_p), "offset_p", "must be finite");
    require(std::isfinite(sensors.offset_theta), "offset_theta", "must be finite");
    require(std::isfinite(sensors.quant_p) && sensors.quant_p >= 0.0, "quant_p",
            "must be nonnegative");
    require(std::isfinite(sensors.quant_theta) && sensors.quant_theta >= 0.0, "quant_theta",
            "must be nonnegative");
    require(std::isfinite(sensors.noise_std_p) && sensors.noise_std_p >= 0.0, "noise_std_p",
            "must be nonnegative");
    require(std::isfinite(sensors.noise_std_theta) && sensors.noise_std_theta >= 0.0,
            "noise_std_theta", "must be nonnegative");
}

double apply_actuator(double voltage, const PlantParams& params) {
    if (!std::isfinite(voltage)) {
        throw SimulationError("apply_actuator: non-finite voltage");
    }
    const double u = voltage - params.voltage_mid;
    if (std::abs(u) <= params.dead_zone_volts) {
        return 0.0;
    }
    return std::clamp(params.motor_gain * u, -params.force_max, params.force_max);
}

StateDerivative dynamics(const PlantState& state, double force, const PlantParams& params) {
    const double m = params.rod_mass;
    const double a = 0.5 * params.rod_length;          // pivot -> center of mass
    const double J = m * params.rod_length * params.rod_length / 3.0;  // about the pivot
    const double total = params.cart_mass + m;

    const double sin_th = std::sin(state.theta);
    const double cos_th = std::cos(state.theta);

    // Generalized force on the cart coordinate.
    const double q_p = force - params.dynamic_friction * state.p_dot -
        params.static_friction * sign(state.p_dot);

    // Coupled equations
    //   total*p'' + m*a*cos*theta''   = q_p + m*a*sin*theta_dot^2
    //   m*a*cos*p'' + J*theta''       = m*g*a*sin
    const double rhs_p = q_p + m * a * sin_th * state.theta_dot * state.theta_dot;
    const double rhs_th = m * params.gravity * a * sin_th;
    const double det = total * J - (m * a * cos_th) * (m * a * cos_th);

    StateDerivative d;
    d.p_dot = state.p_dot;
    d.theta_dot = state.theta_dot;
    d.p_ddot = (J * rhs_p - m * a * cos_th * rhs_th) / det;
    d.theta_ddot = (total * rhs_th - m * a * cos_th * rhs_p) / det;
    return d;
}

PlantState plant_step(const PlantState& state, double voltage, const PlantParams& params,
                      double dt) {
    if (!(dt > 0.0 && dt <= 0.02)) {
        throw SimulationError("plant_step: dt must be in (0, 0.02], got " + std::to_string(dt));
    }
    const double v = std::isfinite(voltage)
        ? std::clamp(voltage, 0.0, params.voltage_span)
        : throw SimulationError("plant_step: non-finite voltage");
    const double force = apply_actuator(v, params);

    auto eval = [&](const PlantState& s) { return dynamics(s, force, params); };
    auto advance = [&](const PlantState& s, const StateDerivative& d, double h) {
        PlantState n = s;
        n.p += h * d.p_dot;
        n.p_dot += h * d.p_ddot;
        n.theta += h * d.theta_dot;
        n.theta_dot += h * d.theta_ddot;
        return n;
    };

    const StateDerivative k1 = eval(state);
    const StateDerivative k2 = eval(advance(state, k1, dt / 2.0));
    const StateDerivative k3 = eval(advance(state, k2, dt / 2.0));
    const StateDerivative k4 = eval(advance(state, k3, dt));

    PlantState next = state;
    next.p += dt / 6.0 * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
    next.p_dot += dt / 6.0 * (k1.p_ddot + 2.0 * k2.p_ddot + 2.0 * k3.p_ddot + k4.p_ddot);
    next.theta += dt / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot);
    next.theta_dot +=
        dt / 6.0 * (k1.theta_ddot + 2.0 * k2.theta_ddot + 2.0 * k3.theta_ddot + k4.theta_ddot);
    next.t += dt;

    // Inelastic rail end-stop.
    if (next.p > params.rail_half_length) {
        next.p = params.rail_half_length;
        next.p_dot = 0.0;
    } else if (next.p < -params.rail_half_length) {
        next.p = -params.rail_half_length;
        next.p_dot = 0.0;
    }

    const double* comps[] = {&next.p, &next.p_dot, &next.theta, &next.theta_dot};
    const char* names[] = {"p", "p_dot", "theta", "theta_dot"};
    for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(*comps[i])) {
            throw SimulationError(std::string("plant_step: non-finite ") + names[i] + " at t=" +
                                  std::to_string(next.t));
        }
    }
    return next;
}

Measurement measure(const PlantState& state, const SensorModel& sensors, RngStream& rng) {
    const double noise_p = rng.gaussian();
    const double noise_th = rng.gaussian();
    Measurement y;
    y.p_meas = quantize(state.p + sensors.offset_p + sensors.noise_std_p * noise_p,
                        sensors.quant_p);
    y.theta_meas = quantize(state.theta + sensors.offset_theta +
                            sensors.noise_std_theta * noise_th, sensors.quant_theta);
    y.t = state.t;
    return y;
}

bool is_out_of_bounds(const PlantState& state, const PlantParams& params) {
    return std::abs(state.p) >= params.rail_half_length ||
           std::abs(state.theta) >= params.angle_limit;
}

double mechanical_energy(const PlantState& state, const PlantParams& params) {
    const double m = params.rod_mass;
    const double a = 0.5 * params.rod_length;
    const double J = m * params.rod_length * params.rod_length / 3.0;
    const double total = params.cart_mass + m;
    const double kinetic = 0.5 * total * state.p_dot * state.p_dot +
        m * a * std::cos(state.theta) * state.p_dot * state.theta_dot +
        0.5 * J * state.theta_dot * state.theta_dot;
    const double potential = m * params.gravity * a * std::cos(state.theta);
    return kinetic + potential;
}

}  // namespace ipend
