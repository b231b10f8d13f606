#include "ipend/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "ipend/errors.hpp"
#include "ipend/linear.hpp"

namespace ipend {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Cost of sitting on the worst corner of the safe box for one second.
double boundary_worst_integrand(const SafeRegion& safe, const FitnessConfig& fc) {
    const double p = std::max(std::abs(safe.box.lo[0]), std::abs(safe.box.hi[0]));
    const double a = std::max(std::abs(safe.box.lo[2]), std::abs(safe.box.hi[2])) * kRadToDeg;
    return fitness_integrand(p, a, fc);
}

}  // namespace

double fitness_integrand(double p, double angle_deg, const FitnessConfig& fc) {
    const double wp = p / fc.position_weight;
    const double wa = angle_deg / fc.angle_weight;
    return wp * wp + wa * wa;
}

void validate(const FitnessConfig& fc) {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(std::string("fitness.") + field + ": " + what);
    };
    require(std::isfinite(fc.position_weight) && fc.position_weight > 0.0, "position_weight",
            "must be strictly positive");
    require(std::isfinite(fc.angle_weight) && fc.angle_weight > 0.0, "angle_weight",
            "must be strictly positive");
    require(std::isfinite(fc.episode_length) && fc.episode_length > 0.0, "episode_length",
            "must be strictly positive");
    require(fc.n_episodes >= 1, "n_episodes", "must be at least 1");
}

void validate(const GaConfig& ga) {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(std::string("ga.") + field + ": " + what);
    };
    require(ga.population >= 2, "population", "must be at least 2");
    require(ga.generations >= 0, "generations", "must be nonnegative");
    require(ga.tournament >= 1 && ga.tournament <= ga.population, "tournament",
            "must be in [1, population]");
    require(std::isfinite(ga.crossover_rate) && ga.crossover_rate >= 0.0 &&
                ga.crossover_rate <= 1.0,
            "crossover_rate", "must be in [0, 1]");
    require(std::isfinite(ga.blend_alpha) && ga.blend_alpha >= 0.0, "blend_alpha",
            "must be nonnegative");
    require(std::isfinite(ga.mutation_rate) && ga.mutation_rate >= 0.0 &&
                ga.mutation_rate <= 1.0,
            "mutation_rate", "must be in [0, 1]");
    require(std::isfinite(ga.mutation_sigma) && ga.mutation_sigma >= 0.0, "mutation_sigma",
            "must be nonnegative");
    require(ga.elites >= 0 && ga.elites < ga.population, "elites",
            "must be in [0, population)");
}

void validate(const SafeRegion& safe, const PlantParams& params) {
    validate(safe.box, "safe");
    if (std::max(std::abs(safe.box.lo[0]), std::abs(safe.box.hi[0])) >=
        params.rail_half_length) {
        throw ConfigError("safe.p: must be strictly inside the rail half-length");
    }
    if (std::max(std::abs(safe.box.lo[2]), std::abs(safe.box.hi[2])) >= params.angle_limit) {
        throw ConfigError("safe.theta: must be strictly inside the angle limit");
    }
}

FitnessRecord evaluate_fitness(const MlpGenome& genome, const SimSetup& sim,
                               const FitnessConfig& fc, const SafeRegion& safe,
                               std::uint64_t seed) {
    const MlpWeights weights = decode_genome(genome);
    const double Ts = sim.lqg.model.Ts;
    const auto n_sub = static_cast<int>(std::llround(Ts / sim.plant_dt));
    if (n_sub < 1 || std::abs(n_sub * sim.plant_dt - Ts) > 1e-9) {
        throw ConfigError("sim.plant_dt: control period is not an integer multiple");
    }
    const auto n_steps = static_cast<long>(std::llround(fc.episode_length / Ts));
    const double worst = boundary_worst_integrand(safe, fc);
    const RngStream root(seed);

    FitnessRecord rec;
    rec.exit_time = fc.episode_length;
    double f_total = 0.0;
    double pos_sq = 0.0;
    double angle_sq = 0.0;
    long samples = 0;

    for (int e = 0; e < fc.n_episodes; ++e) {
        RngStream ic_rng = root.derive("episode_ic", {static_cast<std::uint64_t>(e)});
        RngStream noise_rng = root.derive("episode_noise", {static_cast<std::uint64_t>(e)});

        PlantState state;
        state.p = ic_rng.uniform_in(safe.box.lo[0] / 2.0, safe.box.hi[0] / 2.0);
        state.p_dot = ic_rng.uniform_in(safe.box.lo[1] / 2.0, safe.box.hi[1] / 2.0);
        state.theta = ic_rng.uniform_in(safe.box.lo[2] / 2.0, safe.box.hi[2] / 2.0);
        state.theta_dot = ic_rng.uniform_in(safe.box.lo[3] / 2.0, safe.box.hi[3] / 2.0);

        LqgRuntime rt;
        // The network takes over from the SAFE controller mid-operation, when
        // the shared estimator is already converged; a cold estimator would
        // charge the genome for a filter transient it cannot influence.
        rt.x_hat << state.p, state.p_dot, state.theta, state.theta_dot;
        double f_episode = 0.0;
        bool episode_ok = true;
        for (long k = 0; k < n_steps; ++k) {
            const double p = state.p;
            const double a_deg = state.theta * kRadToDeg;
            f_episode += fitness_integrand(p, a_deg, fc) * Ts;
            pos_sq += p * p;
            angle_sq += a_deg * a_deg;
            ++samples;

            try {
                const Measurement y = measure(state, sim.sensors, noise_rng);
                kalman_update(sim.lqg, rt, y);
                const double voltage = mlp_forward(weights, rt.x_hat, 0.0);
                rt.u_prev = voltage - sim.plant.voltage_mid;
                for (int i = 0; i < n_sub; ++i) {
                    state = plant_step(state, voltage, sim.plant, sim.plant_dt);
                }
            } catch (const SimulationError&) {
                episode_ok = false;  // blowup: penalized like a boundary exit
            }
            if (episode_ok &&
                !contains(safe.box,
                          Eigen::Vector4d(state.p, state.p_dot, state.theta, state.theta_dot),
                          0.0)) {
                episode_ok = false;
            }
            if (!episode_ok) {
                const double t_e = state.t;
                f_episode += worst * (fc.episode_length - t_e);
                rec.survived = false;
                rec.exit_time = std::min(rec.exit_time, t_e);
                break;
            }
        }
        f_total += f_episode;
    }

    rec.fitness = f_total / fc.n_episodes;
    if (samples > 0) {
        rec.pos_rms = std::sqrt(pos_sq / static_cast<double>(samples));
        rec.angle_rms = std::sqrt(angle_sq / static_cast<double>(samples));
    }
    return rec;
}

MlpGenome mutate(const MlpGenome& genome, double rate, double sigma, RngStream& rng) {
    MlpGenome out = genome;
    for (double& g : out.weights) {
        if (rng.uniform() < rate) {
            g = std::clamp(g + sigma * rng.gaussian(), -arch::kWeightClamp, arch::kWeightClamp);
        }
    }
    return out;
}

std::pair<MlpGenome, MlpGenome> crossover(const MlpGenome& parent_a, const MlpGenome& parent_b,
                                          double alpha, RngStream& rng) {
    if (parent_a.weights.size() != parent_b.weights.size()) {
        throw CodecError("crossover: parent genomes differ in length");
    }
    MlpGenome child_a = parent_a;
    MlpGenome child_b = parent_b;
    for (std::size_t i = 0; i < parent_a.weights.size(); ++i) {
        const double a = parent_a.weights[i];
        const double b = parent_b.weights[i];
        const double d = std::abs(a - b);
        const double lo = std::min(a, b) - alpha * d;
        const double hi = std::max(a, b) + alpha * d;
        child_a.weights[i] =
            std::clamp(rng.uniform_in(lo, hi), -arch::kWeightClamp, arch::kWeightClamp);
        child_b.weights[i] =
            std::clamp(rng.uniform_in(lo, hi), -arch::kWeightClamp, arch::kWeightClamp);
    }
    return {std::move(child_a), std::move(child_b)};
}

namespace {

std::size_t tournament_pick(const std::vector<FitnessRecord>& records, int rounds,
                            RngStream& rng) {
    std::size_t best = rng.uniform_index(records.size());
    for (int i = 1; i < rounds; ++i) {
        const std::size_t contender = rng.uniform_index(records.size());
        if (records[contender].fitness < records[best].fitness) best = contender;
    }
    return best;
}

GenerationStats make_stats(int generation, const std::vector<FitnessRecord>& records,
                           double best_so_far) {
    GenerationStats st;
    st.generation = generation;
    st.best_f = best_so_far;
    double sum = 0.0;
    int survivors = 0;
    for (const FitnessRecord& r : records) {
        sum += r.fitness;
        if (r.survived) ++survivors;
    }
    st.mean_f = sum / static_cast<double>(records.size());
    st.survival_rate = static_cast<double>(survivors) / static_cast<double>(records.size());
    return st;
}

}  // namespace

TrainingResult evolve(const GaConfig& ga, const FitnessConfig& fc, const SafeRegion& safe,
                      const SimSetup& sim, std::uint64_t master_seed) {
    validate(ga);
    validate(fc);
    validate(safe, sim.plant);

    const RngStream master(master_seed);
    const auto n = static_cast<std::size_t>(ga.population);

    std::vector<MlpGenome> population(n);
    {
        RngStream init_rng = master.derive("ga_init");
        for (MlpGenome& genome : population) {
            genome.weights.resize(arch::kGenomeDim);
            for (double& g : genome.weights) g = init_rng.uniform_in(-1.0, 1.0);
        }
    }

    // Every evaluation gets its own episode seed derived from (master seed,
    // generation, index), so results do not depend on evaluation order and
    // the whole run is a pure function of (configs, master seed).
    auto evaluate_all = [&](int generation, std::vector<FitnessRecord>& records) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t eval_seed =
                master.derive("eval", {static_cast<std::uint64_t>(generation),
                                       static_cast<std::uint64_t>(i)})
                    .base_seed();
            records[i] = evaluate_fitness(population[i], sim, fc, safe, eval_seed);
            records[i].genome_id = generation * ga.population + static_cast<int>(i);
        }
    };

    std::vector<FitnessRecord> records(n);
    evaluate_all(0, records);

    TrainingResult result;
    result.generations.reserve(static_cast<std::size_t>(ga.generations) + 1);

    // Track the best (genome, record) pair ever scored; the reported
    // per-generation best_f is this running minimum, non-increasing by
    // construction.
    result.best_record.fitness = std::numeric_limits<double>::infinity();
    auto track_best = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            if (records[i].fitness < result.best_record.fitness) {
                result.best_record = records[i];
                result.best = population[i];
            }
        }
    };
    track_best();
    result.generations.push_back(make_stats(0, records, result.best_record.fitness));

    for (int gen = 1; gen <= ga.generations; ++gen) {
        RngStream breed_rng = master.derive("breed", {static_cast<std::uint64_t>(gen)});

        // Elites: lowest-F individuals survive unchanged into the next
        // generation (where they are rescored on its fresh episode seeds).
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return records[a].fitness < records[b].fitness;
        });

        std::vector<MlpGenome> next;
        next.reserve(n);
        for (int e = 0; e < ga.elites; ++e) {
            next.push_back(population[order[static_cast<std::size_t>(e)]]);
        }
        while (next.size() < n) {
            const MlpGenome& parent_a = population[tournament_pick(records, ga.tournament,
                                                                   breed_rng)];
            const MlpGenome& parent_b = population[tournament_pick(records, ga.tournament,
                                                                   breed_rng)];
            MlpGenome child_a = parent_a;
            MlpGenome child_b = parent_b;
            if (breed_rng.uniform() < ga.crossover_rate) {
                std::tie(child_a, child_b) =
                    crossover(parent_a, parent_b, ga.blend_alpha, breed_rng);
            }
            next.push_back(mutate(child_a, ga.mutation_rate, ga.mutation_sigma, breed_rng));
            if (next.size() < n) {
                next.push_back(mutate(child_b, ga.mutation_rate, ga.mutation_sigma, breed_rng));
            }
        }
        population = std::move(next);
        evaluate_all(gen, records);
        track_best();
        result.generations.push_back(make_stats(gen, records, result.best_record.fitness));
    }

    // Bang-bang statistic of the winner over a 100 s balancing run.
    {
        Scenario sc;
        sc.kind = ScenarioKind::kZeroIc;
        sc.duration = 100.0;
        sc.seed = master.derive("bangbang").base_seed();
        const RunResult run =
            run_experiment(sc, ControllerKind::kNeural, sim, decode_genome(result.best));
        long extreme = 0;
        for (const TrajectorySample& s : run.samples) {
            if (std::abs(s.voltage - sim.plant.voltage_mid) > 2.0) ++extreme;
        }
        result.bang_bang_fraction = run.samples.empty()
            ? 0.0
            : static_cast<double>(extreme) / static_cast<double>(run.samples.size());
    }
    return result;
}

SweepReport sweep_table1(const std::vector<std::pair<double, double>>& weights_cm_deg,
                         const GaConfig& ga, const FitnessConfig& base, const SafeRegion& safe,
                         const SimSetup& sim, std::uint64_t master_seed) {
    if (weights_cm_deg.empty()) {
        throw ConfigError("sweep_table1: need at least one (P_w, A_w) pair");
    }
    const RngStream master(master_seed);
    SweepReport report;
    for (std::size_t j = 0; j < weights_cm_deg.size(); ++j) {
        FitnessConfig fc = base;
        fc.position_weight = weights_cm_deg[j].first / 100.0;  // cm -> m
        fc.angle_weight = weights_cm_deg[j].second;
        const TrainingResult trained =
            evolve(ga, fc, safe, sim, master.derive("sweep", {j}).base_seed());

        Scenario sc;
        sc.kind = ScenarioKind::kZeroIc;
        sc.duration = 100.0;
        sc.seed = master.derive("sweep_measure", {j}).base_seed();
        const RunResult lqg_run = run_experiment(sc, ControllerKind::kLqg, sim);
        const RunResult nn_run =
            run_experiment(sc, ControllerKind::kNeural, sim, decode_genome(trained.best));

        SweepRow row;
        row.position_weight_cm = weights_cm_deg[j].first;
        row.angle_weight_deg = weights_cm_deg[j].second;
        row.lqg_pos_rms_cm = lqg_run.pos_rms * 100.0;
        row.neural_pos_rms_cm = nn_run.pos_rms * 100.0;
        row.pos_reduction_pct = row.lqg_pos_rms_cm > 0.0
            ? 100.0 * (row.lqg_pos_rms_cm - row.neural_pos_rms_cm) / row.lqg_pos_rms_cm
            : 0.0;
        row.lqg_angle_rms_deg = lqg_run.angle_rms;
        row.neural_angle_rms_deg = nn_run.angle_rms;
        row.best_f = trained.best_record.fitness;
        report.rows.push_back(row);
    }

    std::ostringstream text;
    std::ostringstream csv;
    char buf[256];
    text << "Balancing RMS by fitness weights, 100 s runs\n\n";
    std::snprintf(buf, sizeof buf, "%8s %9s | %12s %12s %10s | %13s %13s\n", "P_w(cm)",
                  "A_w(deg)", "LQG pos(cm)", "NN pos(cm)", "reduc(%)", "LQG ang(deg)",
                  "NN ang(deg)");
    text << buf;
    csv << "position_weight_cm,angle_weight_deg,lqg_pos_rms_cm,neural_pos_rms_cm,"
           "pos_reduction_pct,lqg_angle_rms_deg,neural_angle_rms_deg,best_f\n";
    for (const SweepRow& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%8.2f %9.2f | %12.3f %12.3f %10.1f | %13.3f %13.3f\n",
                      row.position_weight_cm, row.angle_weight_deg, row.lqg_pos_rms_cm,
                      row.neural_pos_rms_cm, row.pos_reduction_pct, row.lqg_angle_rms_deg,
                      row.neural_angle_rms_deg);
        text << buf;
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      row.position_weight_cm, row.angle_weight_deg, row.lqg_pos_rms_cm,
                      row.neural_pos_rms_cm, row.pos_reduction_pct, row.lqg_angle_rms_deg,
                      row.neural_angle_rms_deg, row.best_f);
        csv << buf;
    }
    report.text = text.str();
    report.csv = csv.str();
    return report;
}

}  // namespace ipend
