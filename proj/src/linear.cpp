#include "ipend/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ipend/errors.hpp"

namespace ipend {

void validate(const LqgWeights& weights) {
    static const char* q_names[4] = {"lqg.q_p", "lqg.q_p_dot", "lqg.q_theta", "lqg.q_theta_dot"};
    for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(weights.q_diag(i)) || weights.q_diag(i) < 0.0) {
            throw ConfigError(std::string(q_names[i]) + ": must be finite and nonnegative");
        }
    }
    if (!std::isfinite(weights.r) || !(weights.r > 0.0)) {
        throw ConfigError("lqg.r: must be strictly positive");
    }
    if (!std::isfinite(weights.process_noise) || !(weights.process_noise > 0.0)) {
        throw ConfigError("lqg.process_noise: must be strictly positive");
    }
}

ContinuousModel linearize(const PlantParams& params) {
    validate(params);
    const double M = params.cart_mass;
    const double m = params.rod_mass;
    const double a = params.rod_length / 2.0;       // pivot -> center of mass
    const double J = m * params.rod_length * params.rod_length / 3.0;
    const double g = params.gravity;
    const double Cp = params.dynamic_friction;
    const double Cv = params.motor_gain;
    const double D0 = (M + m) * J - (m * a) * (m * a);  // det D at theta = 0

    ContinuousModel model;
    model.A.setZero();
    model.A(0, 1) = 1.0;
    model.A(2, 3) = 1.0;
    model.A(1, 1) = -J * Cp / D0;
    model.A(1, 2) = -(m * a) * (m * a) * g / D0;
    model.A(3, 1) = m * a * Cp / D0;
    model.A(3, 2) = (M + m) * m * g * a / D0;

    model.B.setZero();
    model.B(1) = J * Cv / D0;
    model.B(3) = -m * a * Cv / D0;

    model.C.setZero();
    model.C(0, 0) = 1.0;
    model.C(1, 2) = 1.0;
    return model;
}

DiscreteModel discretize(const ContinuousModel& model, double Ts) {
    if (!(Ts > 0.0) || Ts > 0.1) {
        throw SynthesisError("discretize: Ts must be in (0, 0.1], got " + std::to_string(Ts));
    }
    // exp([A B; 0 0] Ts) = [Ad Bd; 0 I]
    Eigen::Matrix<double, 5, 5> aug = Eigen::Matrix<double, 5, 5>::Zero();
    aug.topLeftCorner<4, 4>() = model.A;
    aug.topRightCorner<4, 1>() = model.B;
    const Eigen::Matrix<double, 5, 5> e = (aug * Ts).exp();

    DiscreteModel d;
    d.Ad = e.topLeftCorner<4, 4>();
    d.Bd = e.topRightCorner<4, 1>();
    d.Cd = model.C;
    d.Ts = Ts;
    return d;
}

DareSolution solve_dare(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const auto n = Ad.rows();
    if (Ad.cols() != n || Bd.rows() != n || Q.rows() != n || Q.cols() != n ||
        R.rows() != Bd.cols() || R.cols() != Bd.cols()) {
        throw SynthesisError("solve_dare: inconsistent matrix dimensions");
    }

    constexpr double kDiffTol = 1e-12;
    constexpr double kPlateauDiff = 1e-8;  // plateau acceptance only this close to the fixed point
    constexpr int kMaxIterations = 100000;
    constexpr int kPlateauWindow = 50;  // iterations without improvement before accepting

    Eigen::MatrixXd P = Q;
    double best_diff = std::numeric_limits<double>::infinity();
    int since_improved = 0;
    int iterations = 0;

    for (; iterations < kMaxIterations; ++iterations) {
        const Eigen::MatrixXd BtPA = Bd.transpose() * P * Ad;
        const Eigen::MatrixXd S = R + Bd.transpose() * P * Bd;
        Eigen::MatrixXd next = Q + Ad.transpose() * P * Ad - BtPA.transpose() * S.ldlt().solve(BtPA);
        next = 0.5 * (next + next.transpose());  // keep symmetric

        const double diff = (next - P).cwiseAbs().maxCoeff();
        P = next;
        if (!P.allFinite()) {
            throw SynthesisError("solve_dare: iteration diverged (non-finite iterate)");
        }
        if (diff < kDiffTol) {
            ++iterations;
            break;
        }
        // Large-norm fixed points bottom out above kDiffTol in double precision;
        // accept once the update has stopped shrinking — but only near the
        // fixed point (diffs also stall during the initial growth transient,
        // where stopping would be wrong).
        if (diff < best_diff) {
            best_diff = diff;
            since_improved = 0;
        } else if (++since_improved >= kPlateauWindow && best_diff < kPlateauDiff) {
            ++iterations;
            break;
        }
    }
    if (iterations >= kMaxIterations) {
        throw SynthesisError("solve_dare: no convergence after 100000 iterations");
    }

    const Eigen::MatrixXd BtPA = Bd.transpose() * P * Ad;
    const Eigen::MatrixXd S = R + Bd.transpose() * P * Bd;
    DareSolution sol;
    sol.P = P;
    sol.K = S.ldlt().solve(BtPA);
    sol.residual =
        (Ad.transpose() * P * Ad - P - BtPA.transpose() * S.ldlt().solve(BtPA) + Q).norm();
    sol.iterations = iterations;
    if (!(sol.residual < 1e-9)) {
        throw SynthesisError("solve_dare: residual " + std::to_string(sol.residual) +
                             " exceeds 1e-9");
    }
    return sol;
}

Eigen::Matrix<double, 4, 2> design_kalman(const Eigen::Matrix4d& Ad,
                                          const Eigen::Matrix<double, 2, 4>& Cd,
                                          const Eigen::Matrix4d& W, const Eigen::Matrix2d& Vn) {
    // Dual of the control DARE: P- is the a-priori error covariance.
    const DareSolution dual = solve_dare(Ad.transpose(), Cd.transpose(), W, Vn);
    const Eigen::Matrix4d P_minus = dual.P;
    const Eigen::Matrix2d S = Cd * P_minus * Cd.transpose() + Vn;
    return S.ldlt().solve(Cd * P_minus).transpose();
}

LqgDesign synthesize_lqg(const PlantParams& params, const SensorModel& sensors,
                         const LqgWeights& weights, double Ts) {
    validate(weights);
    validate(sensors);

    LqgDesign d;
    d.model = discretize(linearize(params), Ts);
    d.Q = weights.q_diag.asDiagonal();
    d.R = weights.r;
    d.W = weights.process_noise * Eigen::Matrix4d::Identity();
    d.Vn = Eigen::Vector2d(std::max(sensors.noise_std_p * sensors.noise_std_p, 1e-12),
                           std::max(sensors.noise_std_theta * sensors.noise_std_theta, 1e-12))
               .asDiagonal();

    const DareSolution ctrl =
        solve_dare(d.model.Ad, d.model.Bd, d.Q, Eigen::MatrixXd::Constant(1, 1, d.R));
    d.K = ctrl.K;
    d.dare_residual = ctrl.residual;

    const DareSolution dual = solve_dare(d.model.Ad.transpose(), d.model.Cd.transpose(), d.W, d.Vn);
    d.kalman_residual = dual.residual;
    d.L = design_kalman(d.model.Ad, d.model.Cd, d.W, d.Vn);

    d.rho_closed_loop = spectral_radius(d.model.Ad - d.model.Bd * d.K);
    d.rho_estimator = spectral_radius(d.model.Ad - d.L * d.model.Cd * d.model.Ad);
    if (!(d.rho_closed_loop < 1.0)) {
        throw SynthesisError("synthesize_lqg: closed loop unstable, rho = " +
                             std::to_string(d.rho_closed_loop));
    }
    if (!(d.rho_estimator < 1.0)) {
        throw SynthesisError("synthesize_lqg: estimator unstable, rho = " +
                             std::to_string(d.rho_estimator));
    }
    return d;
}

void kalman_update(const LqgDesign& design, LqgRuntime& rt, const Measurement& y) {
    const Eigen::Vector4d x_bar = design.model.Ad * rt.x_hat + design.model.Bd * rt.u_prev;
    const Eigen::Vector2d innov =
        Eigen::Vector2d(y.p_meas, y.theta_meas) - design.model.Cd * x_bar;
    rt.x_hat = x_bar + design.L * innov;
    if (!rt.x_hat.allFinite()) {
        throw SimulationError("kalman_update: state estimate is non-finite");
    }
}

double lqg_voltage(const LqgDesign& design, const PlantParams& params,
                   const Eigen::Vector4d& x_hat, double r) {
    const Eigen::Vector4d x_ref(r, 0.0, 0.0, 0.0);
    const double u = -design.K.dot(x_hat - x_ref);
    return std::clamp(params.voltage_mid + u, 0.0, params.voltage_span);
}

double lqg_step(const LqgDesign& design, const PlantParams& params, LqgRuntime& rt,
                const Measurement& y, double r) {
    kalman_update(design, rt, y);
    const double voltage = lqg_voltage(design, params, rt.x_hat, r);
    rt.u_prev = voltage - params.voltage_mid;  // what the actuator actually sees
    return voltage;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace ipend
