#pragma once

#include "ipend/rng.hpp"

namespace ipend {

// Physical parameters of the cart-pole rig. The rod is uniform, pivoted at
// the cart (inertia about the pivot m*l^2/3, center of mass at l/2). The
// drive voltage is bipolar about voltage_mid: effective volts
// u = V - voltage_mid produce force C_V * u through a dead zone and a
// force saturation.
struct PlantParams {
    double cart_mass = 1.0;          // M (kg)
    double rod_mass = 0.1;           // m (kg)
    double rod_length = 0.5;         // l (m), full length
    double gravity = 9.81;           // g (m/s^2)
    double motor_gain = 10.0;        // C_V (N per effective volt)
    double dynamic_friction = 5.0;   // C_p (N*s/m), viscous, cart on rail
    double static_friction = 0.5;    // beta (N), Coulomb, sign(p_dot) model
    double rail_half_length = 0.5;   // (m), hard stop at +/- this
    double angle_limit = 0.5;        // (rad), run abandoned beyond this
    double dead_zone_volts = 0.2;    // |u| below this produces no force
    double voltage_mid = 2.5;        // (V), zero-force drive level
    double voltage_span = 5.0;       // (V), drive range is [0, span]
    double force_max = 20.0;         // (N), motor force saturation
};

// True physical state. theta = 0 is upright; positive theta tips the rod
// toward positive p.
struct PlantState {
    double p = 0.0;          // cart position (m)
    double p_dot = 0.0;      // cart velocity (m/s)
    double theta = 0.0;      // rod angle (rad)
    double theta_dot = 0.0;  // rod angular velocity (rad/s)
    double t = 0.0;          // time (s)
};

struct StateDerivative {
    double p_dot = 0.0;
    double p_ddot = 0.0;
    double theta_dot = 0.0;
    double theta_ddot = 0.0;
};

struct SensorModel {
    double offset_p = 0.0;          // (m)
    double offset_theta = 0.0;      // (rad)
    double quant_p = 0.0;           // (m per count), 0 = no quantization
    double quant_theta = 0.0;       // (rad per count), 0 = no quantization
    double noise_std_p = 0.0;       // (m)
    double noise_std_theta = 0.0;   // (rad)
};

struct Measurement {
    double p_meas = 0.0;      // (m)
    double theta_meas = 0.0;  // (rad)
    double t = 0.0;           // (s)
};

// Throws ConfigError naming the offending field ("plant.cart_mass", ...)
// when a parameter violates its invariants: masses, lengths, gravity,
// motor_gain, force_max strictly positive; frictions nonnegative;
// 0 <= dead_zone_volts < voltage_span/2; voltage_mid inside (0, voltage_span);
// rail_half_length > 0; angle_limit in (0, pi/2).
void validate(const PlantParams& params);

// Throws ConfigError ("sensors.quant_p", ...) when a quantization step or
// noise std is negative or any field is non-finite.
void validate(const SensorModel& sensors);

// Motor force from a drive voltage in [0, voltage_span]:
// u = V - voltage_mid; zero inside the dead zone, else C_V*u clamped to
// +/- force_max. Throws SimulationError on non-finite voltage.
double apply_actuator(double voltage, const PlantParams& params);

// Nonlinear cart-pole equations of motion with viscous friction -C_p*p_dot
// and Coulomb friction -beta*sign(p_dot) on the cart (sign(0) = 0).
StateDerivative dynamics(const PlantState& state, double force, const PlantParams& params);

// One RK4 step with the drive voltage held constant (zero-order hold).
// Voltage is clamped to [0, voltage_span] before the actuator. The cart is
// clamped at +/- rail_half_length with p_dot zeroed on contact. Requires
// 0 < dt <= 0.02; throws SimulationError on a non-finite result, naming
// the offending component.
PlantState plant_step(const PlantState& state, double voltage, const PlantParams& params,
                      double dt);

// Sensor readings: offset, additive Gaussian noise, then quantization
// (round-to-nearest multiple of the step; identity when the step is 0).
// Draws exactly two Gaussians per call (position first, then angle), even
// when a noise std is zero, so stream layout does not depend on the
// sensor configuration.
Measurement measure(const PlantState& state, const SensorModel& sensors, RngStream& rng);

// True iff |p| >= rail_half_length or |theta| >= angle_limit (inclusive).
bool is_out_of_bounds(const PlantState& state, const PlantParams& params);

// Kinetic + potential energy; the potential reference puts the rod's center
// of mass at height zero when the rod hangs horizontal.
double mechanical_energy(const PlantState& state, const PlantParams& params);

}  // namespace ipend
