#pragma once

#include <Eigen/Core>

#include "ipend/plant.hpp"

namespace ipend {

// Linear model about the upright equilibrium. State order [p, p_dot, theta,
// theta_dot]; the input is in effective volts (force = C_V * u, dead zone
// ignored by the linearization); outputs are the measured p and theta.
struct ContinuousModel {
    Eigen::Matrix4d A;
    Eigen::Vector4d B;
    Eigen::Matrix<double, 2, 4> C;
};

struct DiscreteModel {
    Eigen::Matrix4d Ad;
    Eigen::Vector4d Bd;
    Eigen::Matrix<double, 2, 4> Cd;
    double Ts = 0.0;  // (s)
};

// LQR / Kalman weight choices. The default tune favors moderate gains: a
// cheaper control effort would let the cart drift, while a much stiffer one
// saturates the actuator on large transients and whips the rod.
struct LqgWeights {
    Eigen::Vector4d q_diag{100.0, 1.0, 10.0, 1.0};
    double r = 0.003;
    double process_noise = 1e-4;  // W = process_noise * I
};

// Throws ConfigError ("lqg.q_p", "lqg.r", ...) on nonpositive r or
// process_noise, or a negative/non-finite Q diagonal.
void validate(const LqgWeights& weights);

struct DareSolution {
    Eigen::MatrixXd P;  // cost-to-go / a-priori covariance
    Eigen::MatrixXd K;  // (R + B'PB)^-1 B'PA
    double residual = 0.0;
    int iterations = 0;
};

// Complete synthesized controller + estimator.
struct LqgDesign {
    DiscreteModel model;
    Eigen::RowVector4d K;             // state feedback gain
    Eigen::Matrix<double, 4, 2> L;    // measurement-update Kalman gain
    Eigen::Matrix4d Q;
    double R = 0.0;
    Eigen::Matrix4d W;
    Eigen::Matrix2d Vn;
    double dare_residual = 0.0;       // controller DARE, Frobenius
    double kalman_residual = 0.0;     // estimator dual DARE, Frobenius
    double rho_closed_loop = 0.0;     // spectral radius of Ad - Bd*K
    double rho_estimator = 0.0;       // spectral radius of Ad - L*Cd*Ad
};

// Estimator + controller memory carried between control steps.
struct LqgRuntime {
    Eigen::Vector4d x_hat = Eigen::Vector4d::Zero();
    double u_prev = 0.0;  // effective volts applied over the last period
};

// Analytic Jacobian of dynamics() at the origin with force = C_V * u.
// The Coulomb term is non-smooth at p_dot = 0 and contributes nothing.
ContinuousModel linearize(const PlantParams& params);

// Zero-order-hold discretization through the matrix exponential of the
// augmented [A B; 0 0] * Ts block. Requires Ts in (0, 0.1].
DiscreteModel discretize(const ContinuousModel& model, double Ts);

// Fixed-point iteration of the Riccati map from P0 = Q:
//   P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA
// Stops when successive iterates differ by < 1e-12 (max-abs), or when the
// difference has stopped shrinking (floating-point plateau for large-norm
// solutions). Throws SynthesisError after 100000 iterations or when the
// final residual exceeds 1e-9.
DareSolution solve_dare(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

// Steady-state measurement-update Kalman gain via the dual DARE
// (Ad -> Ad', Bd -> Cd', Q -> W, R -> Vn):  L = P C' (C P C' + Vn)^-1.
Eigen::Matrix<double, 4, 2> design_kalman(const Eigen::Matrix4d& Ad,
                                          const Eigen::Matrix<double, 2, 4>& Cd,
                                          const Eigen::Matrix4d& W, const Eigen::Matrix2d& Vn);

// linearize + discretize + both Riccati solves. Vn is taken from the sensor
// noise variances (floored at 1e-12 to stay positive definite).
LqgDesign synthesize_lqg(const PlantParams& params, const SensorModel& sensors,
                         const LqgWeights& weights, double Ts);

// Current-estimator measurement update:
//   x_bar = Ad x_hat + Bd u_prev;  x_hat = x_bar + L (y - Cd x_bar).
// Throws SimulationError if the estimate goes non-finite.
void kalman_update(const LqgDesign& design, LqgRuntime& rt, const Measurement& y);

// u = -K (x_hat - x_ref), x_ref = [r 0 0 0]; returns the drive voltage
// clamp(voltage_mid + u, 0, voltage_span).
double lqg_voltage(const LqgDesign& design, const PlantParams& params,
                   const Eigen::Vector4d& x_hat, double r);

// One full controller step: measurement update, control law, and u_prev
// bookkeeping. Returns the drive voltage.
double lqg_step(const LqgDesign& design, const PlantParams& params, LqgRuntime& rt,
                const Measurement& y, double r);

double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace ipend
