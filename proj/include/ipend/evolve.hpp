#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ipend/harness.hpp"
#include "ipend/hypercube.hpp"
#include "ipend/mlp.hpp"
#include "ipend/rng.hpp"

namespace ipend {

// Eq.-(2)-style quadratic tracking cost: F = sum((P/P_w)^2 + (A/A_w)^2) * Ts
// with P the cart position (m) and A the rod angle (degrees), sampled at the
// control period (rectangle rule). Lower is better.
struct FitnessConfig {
    double position_weight = 0.005;  // P_w (m); Table-1 rows quote cm
    double angle_weight = 0.5;       // A_w (deg)
    double episode_length = 30.0;    // T (s)
    int n_episodes = 3;              // averaged, distinct seeds
};

// Training confinement box, relative to the regulation point. Episodes end
// (with a penalty) the moment the true state leaves it, so training never
// relies on the plant's hard limits. The default cart-velocity face is
// deliberately tighter than the rod-rate face: braking the cart transfers
// momentum into rod swing (about 3 rad/s of rod rate per m/s of cart
// velocity), so states with high cart speed near the position face are
// unrecoverable and worthless as training starts.
struct SafeRegion {
    Hypercube box = symmetric_box(0.25, 1.0, 0.25, 2.0);
};

struct GaConfig {
    int population = 40;
    int generations = 60;        // breeding rounds after the initial evaluation
    int tournament = 4;
    double crossover_rate = 0.9;
    double blend_alpha = 0.5;    // BLX-alpha interval extension
    double mutation_rate = 0.1;  // per-gene probability
    // Useful hidden-layer gains need weights of order 10 (a sigmoid chain
    // attenuates slopes by ~0.25 per layer); mutation is the only operator
    // that can reach them from the [-1, 1] init, hence the large step.
    double mutation_sigma = 4.0;
    int elites = 2;              // genomes carried unchanged, rescored
};

void validate(const FitnessConfig& fc);
void validate(const GaConfig& ga);
// The safe box must sit strictly inside the plant's hard limits.
void validate(const SafeRegion& safe, const PlantParams& params);

// (P/P_w)^2 + (A/A_w)^2 at one sample — the quadratic cost density.
double fitness_integrand(double p, double angle_deg, const FitnessConfig& fc);

struct FitnessRecord {
    int genome_id = 0;
    double fitness = 0.0;     // mean F over episodes; always finite
    bool survived = true;     // every episode stayed inside the safe box
    double exit_time = 0.0;   // earliest exit (s); episode length if survived
    double pos_rms = 0.0;     // (m) over in-box samples
    double angle_rms = 0.0;   // (deg)
};

// Closed-loop episodes from seeded initial states inside the inner half of
// the safe box, shared Kalman estimator warm-started at the episode state
// (the network inherits a converged filter from the SAFE controller), the
// genome's network in control at r = 0.
// Leaving the box at t_e charges the boundary-worst integrand for the
// remaining T - t_e, so any surviving genome scores strictly better than
// any failing one. Simulation faults are penalized the same way — this
// function never throws on dynamics, only on malformed inputs.
FitnessRecord evaluate_fitness(const MlpGenome& genome, const SimSetup& sim,
                               const FitnessConfig& fc, const SafeRegion& safe,
                               std::uint64_t seed);

// Each gene independently, with probability `rate`, gets gaussian(0, sigma)
// added; results clamp to [-30, 30]. One uniform draw per gene; the gaussian
// is drawn only for mutated genes.
MlpGenome mutate(const MlpGenome& genome, double rate, double sigma, RngStream& rng);

// Blend (BLX-alpha) crossover: per gene, both children sample uniformly from
// [min - alpha*d, max + alpha*d], d = |a - b| (child_a's draw first); clamped
// to [-30, 30]. Throws CodecError on length mismatch.
std::pair<MlpGenome, MlpGenome> crossover(const MlpGenome& parent_a, const MlpGenome& parent_b,
                                          double alpha, RngStream& rng);

struct GenerationStats {
    int generation = 0;
    double best_f = 0.0;       // best F seen so far (non-increasing)
    double mean_f = 0.0;       // population mean this generation
    double survival_rate = 0.0;
};

struct TrainingResult {
    MlpGenome best;
    FitnessRecord best_record;
    std::vector<GenerationStats> generations;  // size generations + 1
    // Fraction of samples with |V - voltage_mid| > 2 V in a 100 s balancing
    // run of the best genome — how bang-bang the learned control is.
    double bang_bang_fraction = 0.0;
};

// Generational GA: tournament selection, blend crossover, gaussian mutation,
// elitism. Initial genes uniform in [-1, 1]. Every evaluation draws its
// episodes from a seed derived from (master seed, generation, index), so the
// result is a pure function of (configs, master_seed) regardless of
// evaluation order or parallelism.
TrainingResult evolve(const GaConfig& ga, const FitnessConfig& fc, const SafeRegion& safe,
                      const SimSetup& sim, std::uint64_t master_seed);

struct SweepRow {
    double position_weight_cm = 0.0;
    double angle_weight_deg = 0.0;
    double lqg_pos_rms_cm = 0.0;
    double neural_pos_rms_cm = 0.0;
    double pos_reduction_pct = 0.0;   // positive = neural better
    double lqg_angle_rms_deg = 0.0;
    double neural_angle_rms_deg = 0.0;
    double best_f = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::string text;
    std::string csv;
};

// One full training run per (P_w cm, A_w deg) pair, then a 100 s balancing
// comparison of each best genome against the LQG baseline (same seed).
SweepReport sweep_table1(const std::vector<std::pair<double, double>>& weights_cm_deg,
                         const GaConfig& ga, const FitnessConfig& base, const SafeRegion& safe,
                         const SimSetup& sim, std::uint64_t master_seed);

}  // namespace ipend
