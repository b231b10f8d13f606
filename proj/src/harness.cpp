#include "ipend/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <tuple>

#include "ipend/errors.hpp"
#include "ipend/rng.hpp"

namespace ipend {

namespace {

constexpr const char* kCsvHeader =
    "t,p,p_dot,theta,theta_dot,p_hat,pdot_hat,theta_hat,thetadot_hat,"
    "p_meas,theta_meas,r,voltage,active";

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

int substeps_per_period(double Ts, double plant_dt) {
    const auto n = static_cast<int>(std::llround(Ts / plant_dt));
    if (n < 1 || std::abs(n * plant_dt - Ts) > 1e-9) {
        throw ConfigError("sim.plant_dt: control period " + std::to_string(Ts) +
                          " is not an integer multiple of " + std::to_string(plant_dt));
    }
    return n;
}

void validate_scenario(const Scenario& sc) {
    if (!(sc.duration > 0.0)) {
        throw ConfigError("scenario.duration: must be positive");
    }
    if ((sc.kind == ScenarioKind::kSquareLow || sc.kind == ScenarioKind::kSquareHigh) &&
        !(sc.frequency > 0.0)) {
        throw ConfigError("scenario.frequency: must be positive for square kinds");
    }
}

PlantState initial_state(const Scenario& sc, RngStream& ic_rng) {
    PlantState s;
    switch (sc.kind) {
        case ScenarioKind::kZeroIc:
            s.p = ic_rng.uniform_in(-sc.zero_ic_mag, sc.zero_ic_mag);
            s.theta = ic_rng.uniform_in(-sc.zero_ic_mag, sc.zero_ic_mag);
            break;
        case ScenarioKind::kOffsetIc:
            s.p = sc.offset_p;
            break;
        case ScenarioKind::kSquareLow:
        case ScenarioKind::kSquareHigh:
            break;  // origin
        case ScenarioKind::kCustom:
            s = sc.initial;
            s.t = 0.0;
            break;
    }
    return s;
}

}  // namespace

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::kZeroIc: return "zero_ic";
        case ScenarioKind::kOffsetIc: return "offset_ic";
        case ScenarioKind::kSquareLow: return "square_low";
        case ScenarioKind::kSquareHigh: return "square_high";
        case ScenarioKind::kCustom: return "custom";
    }
    return "?";
}

const char* to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::kLqg: return "lqg";
        case ControllerKind::kNeural: return "neural";
        case ControllerKind::kHybrid: return "hybrid";
    }
    return "?";
}

double reference_signal(const Scenario& sc, double t) {
    switch (sc.kind) {
        case ScenarioKind::kSquareLow:
        case ScenarioKind::kSquareHigh: {
            const double phase = t * sc.frequency;
            return phase - std::floor(phase) < 0.5 ? sc.amplitude : -sc.amplitude;
        }
        default:
            return 0.0;
    }
}

std::pair<double, double> compute_rms(const std::vector<TrajectorySample>& samples) {
    if (samples.empty()) {
        throw MetricError("compute_rms: empty trajectory log");
    }
    double pos_sq = 0.0;
    double angle_sq = 0.0;
    for (const TrajectorySample& s : samples) {
        const double e = s.p - s.r;
        pos_sq += e * e;
        angle_sq += s.theta * s.theta;
    }
    const auto n = static_cast<double>(samples.size());
    return {std::sqrt(pos_sq / n), std::sqrt(angle_sq / n) * kRadToDeg};
}

RunResult run_experiment(const Scenario& sc, ControllerKind controller, const SimSetup& sim,
                         const std::optional<MlpWeights>& neural,
                         const std::optional<SwitchConfig>& switching) {
    validate_scenario(sc);
    if ((controller == ControllerKind::kNeural || controller == ControllerKind::kHybrid) &&
        !neural) {
        throw ConfigError("run_experiment: controller needs neural weights");
    }
    if (controller == ControllerKind::kHybrid && !switching) {
        throw ConfigError("run_experiment: hybrid controller needs a switch config");
    }

    const double Ts = sim.lqg.model.Ts;
    const int n_sub = substeps_per_period(Ts, sim.plant_dt);
    const auto n_steps = static_cast<long>(std::llround(sc.duration / Ts));

    const RngStream root(sc.seed);
    RngStream ic_rng = root.derive("ic");
    RngStream noise_rng = root.derive("noise");

    RunResult result;
    result.scenario = sc.kind;
    result.controller = controller;
    result.seed = sc.seed;
    result.samples.reserve(static_cast<std::size_t>(n_steps));

    PlantState state = initial_state(sc, ic_rng);
    LqgRuntime lqg_rt;
    HybridRuntime hybrid_rt;
    if (controller == ControllerKind::kHybrid) {
        hybrid_rt.neural = *neural;
        hybrid_rt.config = *switching;
    }

    result.survived = true;
    result.failure_time = sc.duration;
    for (long k = 0; k < n_steps; ++k) {
        const double r = reference_signal(sc, state.t);
        double voltage = 0.0;
        int active = 0;
        try {
            const Measurement y = measure(state, sim.sensors, noise_rng);
            switch (controller) {
                case ControllerKind::kLqg:
                    voltage = lqg_step(sim.lqg, sim.plant, lqg_rt, y, r);
                    break;
                case ControllerKind::kNeural:
                    kalman_update(sim.lqg, lqg_rt, y);
                    voltage = mlp_forward(*neural, lqg_rt.x_hat, r);
                    lqg_rt.u_prev = voltage - sim.plant.voltage_mid;
                    active = 1;
                    break;
                case ControllerKind::kHybrid:
                    voltage = hybrid_control(sim.lqg, sim.plant, hybrid_rt, y, r);
                    active = hybrid_rt.sw.active == ActiveController::kNeural ? 1 : 0;
                    break;
            }
            const Eigen::Vector4d& x_hat =
                controller == ControllerKind::kHybrid ? hybrid_rt.lqg.x_hat : lqg_rt.x_hat;
            result.samples.push_back({state.t, state.p, state.p_dot, state.theta,
                                      state.theta_dot, x_hat(0), x_hat(1), x_hat(2), x_hat(3),
                                      y.p_meas, y.theta_meas, r, voltage, active});

            for (int i = 0; i < n_sub; ++i) {
                state = plant_step(state, voltage, sim.plant, sim.plant_dt);
            }
        } catch (const SimulationError&) {
            result.survived = false;
            result.failure_time = state.t;
            break;
        }
        if (is_out_of_bounds(state, sim.plant)) {
            result.survived = false;
            result.failure_time = state.t;
            break;
        }
    }

    if (!result.samples.empty()) {
        std::tie(result.pos_rms, result.angle_rms) = compute_rms(result.samples);
    }
    if (controller == ControllerKind::kHybrid) {
        result.events = hybrid_rt.sw.events;
    }
    return result;
}

void write_trajectory_csv(const std::vector<TrajectorySample>& samples,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open trajectory file for writing: " + path.string());
    out << kCsvHeader << "\n";
    char buf[512];
    for (const TrajectorySample& s : samples) {
        std::snprintf(buf, sizeof buf,
                      "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                      "%.12g,%.12g,%d\n",
                      s.t, s.p, s.p_dot, s.theta, s.theta_dot, s.p_hat, s.pdot_hat, s.theta_hat,
                      s.thetadot_hat, s.p_meas, s.theta_meas, s.r, s.voltage, s.active);
        out << buf;
    }
    if (!out.flush()) throw IoError("failed writing trajectory file: " + path.string());
}

std::vector<TrajectorySample> load_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw CodecError(path.string() + ": bad or missing CSV header");
    }
    std::vector<TrajectorySample> samples;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        double v[14];
        for (int i = 0; i < 14; ++i) {
            if (!std::getline(row, field, ',')) {
                throw CodecError(path.string() + ":" + std::to_string(lineno) +
                                 ": expected 14 fields");
            }
            try {
                std::size_t pos = 0;
                v[i] = std::stod(field, &pos);
                if (pos != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw CodecError(path.string() + ":" + std::to_string(lineno) +
                                 ": bad field '" + field + "'");
            }
        }
        if (std::getline(row, field, ',')) {
            throw CodecError(path.string() + ":" + std::to_string(lineno) + ": extra fields");
        }
        TrajectorySample s{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10],
                           v[11], v[12], 0};
        if (v[13] != 0.0 && v[13] != 1.0) {
            throw CodecError(path.string() + ":" + std::to_string(lineno) +
                             ": active flag must be 0 or 1");
        }
        s.active = static_cast<int>(v[13]);
        samples.push_back(s);
    }
    return samples;
}

std::vector<Eigen::Vector4d> relative_estimates(const std::vector<TrajectorySample>& samples) {
    std::vector<Eigen::Vector4d> rel;
    rel.reserve(samples.size());
    for (const TrajectorySample& s : samples) {
        rel.emplace_back(s.p_hat - s.r, s.pdot_hat, s.theta_hat, s.thetadot_hat);
    }
    return rel;
}

RunResult summarize_samples(ScenarioKind scenario, ControllerKind controller,
                            std::vector<TrajectorySample> samples, double duration, double Ts) {
    RunResult result;
    result.scenario = scenario;
    result.controller = controller;
    result.samples = std::move(samples);
    std::tie(result.pos_rms, result.angle_rms) = compute_rms(result.samples);
    for (std::size_t i = 1; i < result.samples.size(); ++i) {
        if (result.samples[i].active != result.samples[i - 1].active) {
            const bool to_neural = result.samples[i].active == 1;
            result.events.push_back({result.samples[i].t,
                                     to_neural ? ActiveController::kLqg : ActiveController::kNeural,
                                     to_neural ? ActiveController::kNeural
                                               : ActiveController::kLqg});
        }
    }
    const auto expected = static_cast<std::size_t>(std::llround(duration / Ts));
    result.survived = result.samples.size() >= expected;
    result.failure_time = result.survived ? duration : result.samples.back().t;
    return result;
}

Table2Report report_table2(const std::vector<RunResult>& runs) {
    constexpr ScenarioKind kScenarios[4] = {ScenarioKind::kZeroIc, ScenarioKind::kOffsetIc,
                                            ScenarioKind::kSquareLow, ScenarioKind::kSquareHigh};
    Table2Report report;
    for (const RunResult& run : runs) {
        int ctrl = -1;
        if (run.controller == ControllerKind::kLqg) ctrl = 0;
        if (run.controller == ControllerKind::kHybrid) ctrl = 1;
        if (ctrl < 0) continue;  // stand-alone neural runs are not Table 2 rows
        int sc = -1;
        for (int i = 0; i < 4; ++i) {
            if (run.scenario == kScenarios[i]) sc = i;
        }
        if (sc < 0) continue;
        Table2Cell& cell = report.cells[ctrl][sc];
        double neural_frac = 0.0;
        if (!run.samples.empty()) {
            const auto on = std::count_if(run.samples.begin(), run.samples.end(),
                                          [](const TrajectorySample& s) { return s.active == 1; });
            neural_frac = static_cast<double>(on) / static_cast<double>(run.samples.size());
        }
        ++cell.runs;
        cell.pos_rms += run.pos_rms;
        cell.angle_rms += run.angle_rms;
        cell.mean_events += static_cast<double>(run.events.size());
        cell.neural_fraction += neural_frac;
        cell.all_survived = cell.all_survived && run.survived;
    }
    for (int c = 0; c < 2; ++c) {
        for (int s = 0; s < 4; ++s) {
            Table2Cell& cell = report.cells[c][s];
            if (cell.runs == 0) {
                throw MetricError(std::string("report_table2: no runs for ") +
                                  (c == 0 ? "lqg" : "hybrid") + " / " +
                                  to_string(kScenarios[s]));
            }
            cell.pos_rms /= cell.runs;
            cell.angle_rms /= cell.runs;
            cell.mean_events /= cell.runs;
            cell.neural_fraction /= cell.runs;
        }
    }

    std::ostringstream text;
    std::ostringstream csv;
    char buf[256];
    text << "Tracking performance, mean RMS over repeated seeded runs\n\n";
    std::snprintf(buf, sizeof buf, "%-28s %12s %12s %12s %12s\n", "", "balancing", "offset 0.15m",
                  "square 0.05Hz", "square 0.5Hz");
    text << buf;
    auto row = [&](const char* label, int ctrl, auto field, const char* fmt) {
        std::snprintf(buf, sizeof buf, "%-28s", label);
        text << buf;
        for (int s = 0; s < 4; ++s) {
            std::snprintf(buf, sizeof buf, fmt, field(report.cells[ctrl][s]));
            text << buf;
        }
        text << "\n";
    };
    row("LQG    position RMS (m)", 0, [](const Table2Cell& c) { return c.pos_rms; }, " %12.4f");
    row("LQG    angle RMS (deg)", 0, [](const Table2Cell& c) { return c.angle_rms; }, " %12.2f");
    row("hybrid position RMS (m)", 1, [](const Table2Cell& c) { return c.pos_rms; }, " %12.4f");
    row("hybrid angle RMS (deg)", 1, [](const Table2Cell& c) { return c.angle_rms; }, " %12.2f");
    row("hybrid neural time (%)", 1,
        [](const Table2Cell& c) { return 100.0 * c.neural_fraction; }, " %12.1f");
    row("hybrid switch events/run", 1, [](const Table2Cell& c) { return c.mean_events; },
        " %12.1f");
    text << std::string(28, '-') << "\n";
    std::snprintf(buf, sizeof buf, "%-28s", "position RMS delta (%)");
    text << buf;
    for (int s = 0; s < 4; ++s) {
        const double lqg = report.cells[0][s].pos_rms;
        const double delta = lqg > 0.0
            ? 100.0 * (report.cells[1][s].pos_rms - lqg) / lqg
            : 0.0;
        std::snprintf(buf, sizeof buf, " %+12.1f", delta);
        text << buf;
    }
    text << "\n";

    csv << "scenario,controller,runs,pos_rms_m,angle_rms_deg,neural_fraction,"
           "switch_events,all_survived\n";
    for (int c = 0; c < 2; ++c) {
        for (int s = 0; s < 4; ++s) {
            const Table2Cell& cell = report.cells[c][s];
            std::snprintf(buf, sizeof buf, "%s,%s,%d,%.12g,%.12g,%.12g,%.12g,%d\n",
                          to_string(kScenarios[s]), c == 0 ? "lqg" : "hybrid", cell.runs,
                          cell.pos_rms, cell.angle_rms, cell.neural_fraction, cell.mean_events,
                          cell.all_survived ? 1 : 0);
            csv << buf;
        }
    }
    report.text = text.str();
    report.csv = csv.str();
    return report;
}

}  // namespace ipend
