#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "ipend/errors.hpp"
#include "ipend/harness.hpp"
#include "ipend/rng.hpp"

using namespace ipend;
namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 57.29577951308232;

// One shared LQG synthesis for every closed-loop test in this file.
const SimSetup& shared_setup() {
    static const SimSetup sim = [] {
        SimSetup s;
        s.sensors = SensorModel{0.0, 0.0, 5e-4, 5e-4, 1e-3, 1e-3};
        s.lqg = synthesize_lqg(s.plant, s.sensors, LqgWeights{}, 0.01);
        s.plant_dt = 0.001;
        return s;
    }();
    return sim;
}

Scenario make_scn(ScenarioKind kind, double duration, std::uint64_t seed) {
    Scenario sc;
    sc.kind = kind;
    sc.duration = duration;
    sc.seed = seed;
    if (kind == ScenarioKind::kSquareLow) {
        sc.frequency = 0.05;
        sc.amplitude = 0.15;
    } else if (kind == ScenarioKind::kSquareHigh) {
        sc.frequency = 0.5;
        sc.amplitude = 0.15;
    }
    return sc;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("ipend_harness_" + tag + "_" +
                                            std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

TrajectorySample sample_at(double t, double p, double theta, double r = 0.0, int active = 0) {
    TrajectorySample s;
    s.t = t;
    s.p = p;
    s.theta = theta;
    s.r = r;
    s.active = active;
    return s;
}

RunResult table_run(ControllerKind ctrl, ScenarioKind scn, double pos_rms, double angle_rms,
                    int n_events, int n_neural_of_4) {
    RunResult run;
    run.controller = ctrl;
    run.scenario = scn;
    run.pos_rms = pos_rms;
    run.angle_rms = angle_rms;
    run.survived = true;
    for (int i = 0; i < 4; ++i) {
        run.samples.push_back(sample_at(0.01 * i, 0.0, 0.0, 0.0, i < n_neural_of_4 ? 1 : 0));
    }
    for (int i = 0; i < n_events; ++i) {
        run.events.push_back({0.5 * (i + 1), ActiveController::kLqg, ActiveController::kNeural});
    }
    return run;
}

}  // namespace

TEST_CASE("harness: reference signal of the balancing scenarios is zero") {
    const Scenario zero = make_scn(ScenarioKind::kZeroIc, 100.0, 1);
    const Scenario offset = make_scn(ScenarioKind::kOffsetIc, 100.0, 1);
    for (double t : {0.0, 0.3, 7.0, 42.7, 99.99}) {
        CHECK(reference_signal(zero, t) == 0.0);
        CHECK(reference_signal(offset, t) == 0.0);
    }
}

TEST_CASE("harness: slow square wave holds +amp for the first half period") {
    const Scenario low = make_scn(ScenarioKind::kSquareLow, 100.0, 1);  // 20 s period
    CHECK(reference_signal(low, 0.0) == 0.15);
    CHECK(reference_signal(low, 3.0) == 0.15);
    CHECK(reference_signal(low, 9.99) == 0.15);
    CHECK(reference_signal(low, 12.0) == -0.15);
    CHECK(reference_signal(low, 19.99) == -0.15);
    CHECK(reference_signal(low, 20.5) == 0.15);
    CHECK(reference_signal(low, 32.0) == -0.15);
}

TEST_CASE("harness: fast square wave flips sign every second") {
    const Scenario high = make_scn(ScenarioKind::kSquareHigh, 100.0, 1);  // 2 s period
    for (int k = 0; k < 8; ++k) {
        const double expect = (k % 2 == 0) ? 0.15 : -0.15;
        CHECK(reference_signal(high, k + 0.25) == expect);
        CHECK(reference_signal(high, k + 0.75) == expect);
    }
}

TEST_CASE("harness: square wave takes exactly two values and has zero mean") {
    const Scenario high = make_scn(ScenarioKind::kSquareHigh, 100.0, 1);
    std::set<double> levels;
    for (int k = 0; k < 4000; ++k) {
        levels.insert(reference_signal(high, k * 0.01));
    }
    REQUIRE(levels.size() == 2);
    CHECK(*levels.begin() == -0.15);
    CHECK(*levels.rbegin() == 0.15);

    // Pair each sample with its half-period twin: the pair cancels exactly,
    // so the mean over whole periods is an exact zero.
    double sum = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double t = (k + 0.5) * 0.001;  // inside the first half period
        sum += reference_signal(high, t) + reference_signal(high, t + 1.0);
    }
    CHECK(sum == 0.0);
}

TEST_CASE("harness: RMS of constant logs") {
    std::vector<TrajectorySample> flat(50, sample_at(0.0, 0.0, 0.0));
    auto [pos, angle] = compute_rms(flat);
    CHECK(pos == 0.0);
    CHECK(angle == 0.0);

    std::vector<TrajectorySample> alt;
    for (int i = 0; i < 100; ++i) {
        alt.push_back(sample_at(0.01 * i, i % 2 == 0 ? 0.1 : -0.1, 0.1));
    }
    auto [pos2, angle2] = compute_rms(alt);
    CHECK(pos2 == doctest::Approx(0.1).epsilon(1e-12));
    // 0.1 rad expressed in degrees.
    CHECK(angle2 == doctest::Approx(5.729577951308232).epsilon(1e-12));
}

TEST_CASE("harness: position error is measured against the reference") {
    // p tracks r exactly -> zero position RMS even though p is nonzero.
    std::vector<TrajectorySample> tracking;
    for (int i = 0; i < 10; ++i) {
        tracking.push_back(sample_at(0.01 * i, 0.15, 0.0, 0.15));
    }
    auto [pos, angle] = compute_rms(tracking);
    CHECK(pos == 0.0);
    CHECK(angle == 0.0);

    // A constant 0.05 m tracking error.
    for (auto& s : tracking) s.p = 0.20;
    CHECK(compute_rms(tracking).first == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("harness: RMS of a sine is amplitude over sqrt(2)") {
    const int n = 1000;  // five whole periods
    std::vector<TrajectorySample> sine;
    for (int i = 0; i < n; ++i) {
        const double phase = 2.0 * std::numbers::pi * 5.0 * i / n;
        sine.push_back(sample_at(0.001 * i, 0.1 * std::sin(phase), 0.1 * std::sin(phase)));
    }
    auto [pos, angle] = compute_rms(sine);
    CHECK(pos == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(angle == doctest::Approx(kRadToDeg * 0.1 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("harness: RMS of concatenated logs is the weighted quadratic mean") {
    RngStream rng(91);
    std::vector<TrajectorySample> a, b, both;
    for (int i = 0; i < 300; ++i) {
        a.push_back(sample_at(0.01 * i, rng.uniform_in(-0.2, 0.2), rng.gaussian() * 0.05,
                              rng.uniform_in(-0.1, 0.1)));
    }
    for (int i = 0; i < 700; ++i) {
        b.push_back(sample_at(0.01 * i, rng.uniform_in(-0.5, 0.1), rng.gaussian() * 0.02));
    }
    both = a;
    both.insert(both.end(), b.begin(), b.end());

    auto [pa, ta] = compute_rms(a);
    auto [pb, tb] = compute_rms(b);
    auto [pc, tc] = compute_rms(both);
    const double na = 300.0, nb = 700.0;
    CHECK(pc == doctest::Approx(std::sqrt((na * pa * pa + nb * pb * pb) / (na + nb)))
                    .epsilon(1e-9));
    CHECK(tc == doctest::Approx(std::sqrt((na * ta * ta + nb * tb * tb) / (na + nb)))
                    .epsilon(1e-9));
}

TEST_CASE("harness: RMS of an empty log throws") {
    CHECK_THROWS_WITH_AS(compute_rms({}), doctest::Contains("empty"), MetricError);
}

TEST_CASE("harness: runs are deterministic in the scenario seed") {
    const Scenario sc = make_scn(ScenarioKind::kZeroIc, 5.0, 2024);
    const RunResult a = run_experiment(sc, ControllerKind::kLqg, shared_setup());
    const RunResult b = run_experiment(sc, ControllerKind::kLqg, shared_setup());
    REQUIRE(a.samples.size() == b.samples.size());
    REQUIRE(a.samples.size() == 500);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        REQUIRE(a.samples[i].p == b.samples[i].p);
        REQUIRE(a.samples[i].theta == b.samples[i].theta);
        REQUIRE(a.samples[i].p_meas == b.samples[i].p_meas);
        REQUIRE(a.samples[i].voltage == b.samples[i].voltage);
    }
    CHECK(a.pos_rms == b.pos_rms);
    CHECK(a.survived);
    CHECK(a.failure_time == 5.0);

    // A different seed draws different measurement noise.
    Scenario other = sc;
    other.seed = 2025;
    const RunResult c = run_experiment(other, ControllerKind::kLqg, shared_setup());
    CHECK(c.samples[3].p_meas != a.samples[3].p_meas);
}

TEST_CASE("harness: initial conditions follow the scenario kind") {
    const Scenario offset = make_scn(ScenarioKind::kOffsetIc, 1.0, 5);
    const RunResult off = run_experiment(offset, ControllerKind::kLqg, shared_setup());
    REQUIRE(!off.samples.empty());
    CHECK(off.samples[0].t == 0.0);
    CHECK(off.samples[0].p == 0.15);  // logged before the first plant step
    CHECK(off.samples[0].p_dot == 0.0);
    CHECK(off.samples[0].theta == 0.0);

    const Scenario square = make_scn(ScenarioKind::kSquareLow, 1.0, 5);
    const RunResult sq = run_experiment(square, ControllerKind::kLqg, shared_setup());
    CHECK(sq.samples[0].p == 0.0);
    CHECK(sq.samples[0].r == 0.15);  // reference starts high

    // The balancing scenario draws |p|, |theta| <= zero_ic_mag from the
    // seeded stream: position first, then angle.
    const Scenario zero = make_scn(ScenarioKind::kZeroIc, 1.0, 77);
    const RunResult zr = run_experiment(zero, ControllerKind::kLqg, shared_setup());
    RngStream ic = RngStream(77).derive("ic");
    const double expect_p = ic.uniform_in(-0.01, 0.01);
    const double expect_theta = ic.uniform_in(-0.01, 0.01);
    CHECK(zr.samples[0].p == expect_p);
    CHECK(zr.samples[0].theta == expect_theta);
    CHECK(std::abs(zr.samples[0].p) <= 0.01);
    CHECK(std::abs(zr.samples[0].theta) <= 0.01);

    Scenario custom = make_scn(ScenarioKind::kCustom, 1.0, 5);
    custom.initial.p = -0.08;
    custom.initial.theta = 0.04;
    const RunResult cu = run_experiment(custom, ControllerKind::kLqg, shared_setup());
    CHECK(cu.samples[0].p == -0.08);
    CHECK(cu.samples[0].theta == 0.04);
}

TEST_CASE("harness: the initial draw does not depend on the controller") {
    const Scenario sc = make_scn(ScenarioKind::kZeroIc, 1.0, 31);
    const RunResult lqg = run_experiment(sc, ControllerKind::kLqg, shared_setup());

    MlpGenome zero_genome;
    zero_genome.weights.assign(arch::kGenomeDim, 0.0);
    const Hypercube safe = symmetric_box(0.25, 2.0, 0.25, 2.0);
    const SwitchConfig cfg = make_switch_config(symmetric_box(0.05, 0.5, 0.05, 0.5),
                                                symmetric_box(0.1, 1.0, 0.1, 1.0), safe, 0.5,
                                                1.0);
    const RunResult hyb = run_experiment(sc, ControllerKind::kHybrid, shared_setup(),
                                         decode_genome(zero_genome), cfg);
    CHECK(lqg.samples[0].p == hyb.samples[0].p);
    CHECK(lqg.samples[0].theta == hyb.samples[0].theta);
    CHECK(lqg.samples[0].p_meas == hyb.samples[0].p_meas);  // same noise stream too
}

TEST_CASE("harness: missing controller dependencies are configuration errors") {
    const Scenario sc = make_scn(ScenarioKind::kZeroIc, 1.0, 5);
    CHECK_THROWS_WITH_AS(run_experiment(sc, ControllerKind::kNeural, shared_setup()),
                         doctest::Contains("neural weights"), ConfigError);
    CHECK_THROWS_WITH_AS(run_experiment(sc, ControllerKind::kHybrid, shared_setup()),
                         doctest::Contains("neural weights"), ConfigError);
    MlpGenome g;
    g.weights.assign(arch::kGenomeDim, 0.0);
    CHECK_THROWS_WITH_AS(
        run_experiment(sc, ControllerKind::kHybrid, shared_setup(), decode_genome(g)),
        doctest::Contains("switch config"), ConfigError);
}

TEST_CASE("harness: scenario and timing validation") {
    Scenario bad = make_scn(ScenarioKind::kZeroIc, 0.0, 5);
    CHECK_THROWS_WITH_AS(run_experiment(bad, ControllerKind::kLqg, shared_setup()),
                         doctest::Contains("scenario.duration"), ConfigError);
    Scenario square = make_scn(ScenarioKind::kSquareLow, 10.0, 5);
    square.frequency = 0.0;
    CHECK_THROWS_WITH_AS(run_experiment(square, ControllerKind::kLqg, shared_setup()),
                         doctest::Contains("scenario.frequency"), ConfigError);

    SimSetup odd = shared_setup();
    odd.plant_dt = 0.003;  // does not divide the 0.01 s control period
    const Scenario sc = make_scn(ScenarioKind::kZeroIc, 1.0, 5);
    CHECK_THROWS_WITH_AS(run_experiment(sc, ControllerKind::kLqg, odd),
                         doctest::Contains("integer multiple"), ConfigError);
}

TEST_CASE("harness: a hard-limit violation ends the run without throwing") {
    Scenario sc = make_scn(ScenarioKind::kCustom, 10.0, 5);
    sc.initial.theta = 0.45;     // just inside the 0.5 rad limit
    sc.initial.theta_dot = 3.0;  // and falling fast
    const RunResult run = run_experiment(sc, ControllerKind::kLqg, shared_setup());
    CHECK_FALSE(run.survived);
    CHECK(run.failure_time < 1.0);
    CHECK(run.failure_time > 0.0);
    CHECK(run.samples.size() < 1000);
    CHECK(std::isfinite(run.pos_rms));
}

TEST_CASE("harness: trajectory CSV round-trips at 12 significant digits") {
    const TempDir dir("csv");
    const Scenario sc = make_scn(ScenarioKind::kZeroIc, 2.0, 99);
    const RunResult run = run_experiment(sc, ControllerKind::kLqg, shared_setup());
    const fs::path file = dir.path / "run.csv";
    write_trajectory_csv(run.samples, file);

    const std::vector<TrajectorySample> loaded = load_trajectory_csv(file);
    REQUIRE(loaded.size() == run.samples.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].t == doctest::Approx(run.samples[i].t).epsilon(1e-9));
        CHECK(loaded[i].p == doctest::Approx(run.samples[i].p).epsilon(1e-9));
        CHECK(loaded[i].p_dot == doctest::Approx(run.samples[i].p_dot).epsilon(1e-9));
        CHECK(loaded[i].theta == doctest::Approx(run.samples[i].theta).epsilon(1e-9));
        CHECK(loaded[i].theta_dot == doctest::Approx(run.samples[i].theta_dot).epsilon(1e-9));
        CHECK(loaded[i].p_hat == doctest::Approx(run.samples[i].p_hat).epsilon(1e-9));
        CHECK(loaded[i].voltage == doctest::Approx(run.samples[i].voltage).epsilon(1e-9));
        CHECK(loaded[i].active == run.samples[i].active);
    }

    // Extreme magnitudes and a NEURAL flag survive the trip as well.
    std::vector<TrajectorySample> fancy;
    TrajectorySample s = sample_at(1.5, -3.25e-7, 4.0e-11, 0.15, 1);
    s.voltage = 4.999999999;
    fancy.push_back(s);
    const fs::path file2 = dir.path / "fancy.csv";
    write_trajectory_csv(fancy, file2);
    const auto fancy2 = load_trajectory_csv(file2);
    REQUIRE(fancy2.size() == 1);
    CHECK(fancy2[0].p == doctest::Approx(-3.25e-7).epsilon(1e-9));
    CHECK(fancy2[0].theta == doctest::Approx(4.0e-11).epsilon(1e-9));
    CHECK(fancy2[0].active == 1);
}

TEST_CASE("harness: trajectory CSV loader rejects malformed files") {
    const TempDir dir("csvbad");
    auto write_text = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir.path / name);
        out << text;
        return dir.path / name;
    };
    const std::string header =
        "t,p,p_dot,theta,theta_dot,p_hat,pdot_hat,theta_hat,thetadot_hat,"
        "p_meas,theta_meas,r,voltage,active";
    const std::string row = "0,0,0,0,0,0,0,0,0,0,0,0,2.5,0";

    CHECK_THROWS_AS(load_trajectory_csv(dir.path / "missing.csv"), IoError);
    CHECK_THROWS_WITH_AS(load_trajectory_csv(write_text("h.csv", "time,stuff\n" + row + "\n")),
                         doctest::Contains("header"), CodecError);
    CHECK_THROWS_WITH_AS(
        load_trajectory_csv(write_text("short.csv", header + "\n0,1,2\n")),
        doctest::Contains("expected 14 fields"), CodecError);
    CHECK_THROWS_WITH_AS(
        load_trajectory_csv(write_text("garbage.csv",
                                       header + "\n0,0,0,abc,0,0,0,0,0,0,0,0,2.5,0\n")),
        doctest::Contains("bad field"), CodecError);
    CHECK_THROWS_WITH_AS(
        load_trajectory_csv(write_text("extra.csv", header + "\n" + row + ",7\n")),
        doctest::Contains("extra fields"), CodecError);
    CHECK_THROWS_WITH_AS(
        load_trajectory_csv(
            write_text("flag.csv", header + "\n0,0,0,0,0,0,0,0,0,0,0,0,2.5,2\n")),
        doctest::Contains("active flag"), CodecError);

    // A well-formed file with a blank trailing line is fine.
    CHECK_NOTHROW(load_trajectory_csv(write_text("ok.csv", header + "\n" + row + "\n\n")));
}

TEST_CASE("harness: summarize_samples rebuilds events and survival") {
    std::vector<TrajectorySample> log;
    const int flags[10] = {0, 0, 1, 1, 1, 0, 0, 0, 1, 1};
    for (int i = 0; i < 10; ++i) {
        log.push_back(sample_at(0.1 * i, 0.02, 0.01, 0.0, flags[i]));
    }
    const RunResult full = summarize_samples(ScenarioKind::kZeroIc, ControllerKind::kHybrid,
                                             log, 1.0, 0.1);
    CHECK(full.survived);
    CHECK(full.failure_time == 1.0);
    REQUIRE(full.events.size() == 3);
    CHECK(full.events[0].t == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(full.events[0].from == ActiveController::kLqg);
    CHECK(full.events[0].to == ActiveController::kNeural);
    CHECK(full.events[1].t == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(full.events[1].from == ActiveController::kNeural);
    CHECK(full.events[1].to == ActiveController::kLqg);
    CHECK(full.events[2].t == doctest::Approx(0.8).epsilon(1e-12));
    auto [pos, angle] = compute_rms(log);
    CHECK(full.pos_rms == pos);
    CHECK(full.angle_rms == angle);

    log.resize(7);  // short log: the run died at t = 0.6
    const RunResult dead = summarize_samples(ScenarioKind::kZeroIc, ControllerKind::kHybrid,
                                             log, 1.0, 0.1);
    CHECK_FALSE(dead.survived);
    CHECK(dead.failure_time == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("harness: relative estimates subtract the reference from position only") {
    std::vector<TrajectorySample> log(2);
    log[0].p_hat = 0.35;
    log[0].pdot_hat = -0.2;
    log[0].theta_hat = 0.05;
    log[0].thetadot_hat = 1.5;
    log[0].r = 0.15;
    log[1].p_hat = -0.1;
    log[1].r = -0.15;
    const auto rel = relative_estimates(log);
    REQUIRE(rel.size() == 2);
    CHECK(rel[0](0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rel[0](1) == -0.2);
    CHECK(rel[0](2) == 0.05);
    CHECK(rel[0](3) == 1.5);
    CHECK(rel[1](0) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("harness: table report aggregates the eight cells") {
    // Published-shape fixture: one run per cell, except the balancing LQG
    // cell which averages two runs (0.010 and 0.018 -> 0.014).
    std::vector<RunResult> runs;
    runs.push_back(table_run(ControllerKind::kLqg, ScenarioKind::kZeroIc, 0.010, 0.70, 0, 0));
    runs.push_back(table_run(ControllerKind::kLqg, ScenarioKind::kZeroIc, 0.018, 0.74, 0, 0));
    runs.push_back(table_run(ControllerKind::kLqg, ScenarioKind::kOffsetIc, 0.019, 0.75, 0, 0));
    runs.push_back(table_run(ControllerKind::kLqg, ScenarioKind::kSquareLow, 0.077, 1.55, 0, 0));
    runs.push_back(table_run(ControllerKind::kLqg, ScenarioKind::kSquareHigh, 0.20, 4.03, 0, 0));
    runs.push_back(table_run(ControllerKind::kHybrid, ScenarioKind::kZeroIc, 0.0064, 0.56, 1, 3));
    runs.push_back(table_run(ControllerKind::kHybrid, ScenarioKind::kOffsetIc, 0.016, 0.62, 1, 2));
    runs.push_back(table_run(ControllerKind::kHybrid, ScenarioKind::kSquareLow, 0.095, 2.29, 4, 2));
    runs.push_back(table_run(ControllerKind::kHybrid, ScenarioKind::kSquareHigh, 0.20, 4.03, 6, 1));
    // Stand-alone neural runs must be ignored, not averaged in.
    runs.push_back(table_run(ControllerKind::kNeural, ScenarioKind::kZeroIc, 9.9, 99.0, 0, 4));

    const Table2Report report = report_table2(runs);
    CHECK(report.cells[0][0].runs == 2);
    CHECK(report.cells[0][0].pos_rms == doctest::Approx(0.014).epsilon(1e-12));
    CHECK(report.cells[0][0].angle_rms == doctest::Approx(0.72).epsilon(1e-12));
    CHECK(report.cells[1][0].pos_rms == doctest::Approx(0.0064).epsilon(1e-12));
    CHECK(report.cells[1][0].neural_fraction == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(report.cells[1][3].mean_events == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(report.cells[0][3].all_survived);

    // The human-readable grid carries the headline relative improvement:
    // 100 * (0.0064 - 0.014) / 0.014 = -54.3 % for the balancing column.
    CHECK(report.text.find("LQG    position RMS (m)") != std::string::npos);
    CHECK(report.text.find("hybrid position RMS (m)") != std::string::npos);
    CHECK(report.text.find("position RMS delta (%)") != std::string::npos);
    CHECK(report.text.find("-54.3") != std::string::npos);
    CHECK(report.text.find("0.0064") != std::string::npos);

    // Machine-readable rows.
    CHECK(report.csv.find("scenario,controller,runs,") != std::string::npos);
    CHECK(report.csv.find("zero_ic,lqg,2,0.014,0.72,") != std::string::npos);
    CHECK(report.csv.find("zero_ic,hybrid,1,0.0064,0.56,0.75,1,1") != std::string::npos);
    CHECK(report.csv.find("square_high,hybrid,") != std::string::npos);
}

TEST_CASE("harness: table report names a missing cell") {
    std::vector<RunResult> runs;
    for (ScenarioKind scn : {ScenarioKind::kZeroIc, ScenarioKind::kOffsetIc,
                             ScenarioKind::kSquareLow, ScenarioKind::kSquareHigh}) {
        runs.push_back(table_run(ControllerKind::kLqg, scn, 0.02, 1.0, 0, 0));
        if (scn != ScenarioKind::kSquareHigh) {
            runs.push_back(table_run(ControllerKind::kHybrid, scn, 0.02, 1.0, 1, 2));
        }
    }
    CHECK_THROWS_WITH_AS(report_table2(runs), doctest::Contains("hybrid / square_high"),
                         MetricError);
}

TEST_CASE("harness: hybrid run honors the trust region sample by sample") {
    // A do-nothing neural genome (constant mid voltage) cannot balance, so
    // the supervisor keeps handing control back to the LQG loop: the run
    // bounces NEURAL <-> LQG while the LQG keeps it alive.
    MlpGenome zero_genome;
    zero_genome.weights.assign(arch::kGenomeDim, 0.0);
    const Hypercube safe = symmetric_box(0.25, 2.0, 0.25, 2.0);
    const SwitchConfig cfg = make_switch_config(symmetric_box(0.05, 0.5, 0.05, 0.5),
                                                symmetric_box(0.1, 1.0, 0.1, 1.0), safe, 0.5,
                                                1.0);
    // A smooth actuator lets the LQG phase settle all the way back into the
    // entry box; the stock dead band would park it in a limit cycle outside.
    SimSetup sim = shared_setup();
    sim.plant.dead_zone_volts = 0.0;
    sim.plant.static_friction = 0.0;
    sim.lqg = synthesize_lqg(sim.plant, sim.sensors, LqgWeights{}, 0.01);
    Scenario sc = make_scn(ScenarioKind::kZeroIc, 30.0, 7);
    const RunResult run = run_experiment(sc, ControllerKind::kHybrid, sim,
                                         decode_genome(zero_genome), cfg);
    CHECK(run.survived);
    REQUIRE(run.events.size() >= 3);  // at least in, out, and in again

    // Every sample the neural controller produced lies inside the exit box.
    int neural_samples = 0;
    for (const TrajectorySample& s : run.samples) {
        if (s.active != 1) continue;
        ++neural_samples;
        const Eigen::Vector4d est(s.p_hat, s.pdot_hat, s.theta_hat, s.thetadot_hat);
        REQUIRE(contains(cfg.omega_lhc, est, s.r));
    }
    CHECK(neural_samples > 0);

    // Events alternate and handovers to NEURAL respect the dwell spacing.
    double last_entry = -1e9;
    for (std::size_t i = 0; i < run.events.size(); ++i) {
        if (i > 0) CHECK(run.events[i].from == run.events[i - 1].to);
        if (run.events[i].to == ActiveController::kNeural) {
            CHECK(run.events[i].t - last_entry >= cfg.t_sw - 1e-9);
            last_entry = run.events[i].t;
        }
    }

    // The sample flags tell the same story as the event log.
    int transitions = 0;
    for (std::size_t i = 1; i < run.samples.size(); ++i) {
        if (run.samples[i].active != run.samples[i - 1].active) ++transitions;
    }
    CHECK(transitions == static_cast<int>(run.events.size()));
}
