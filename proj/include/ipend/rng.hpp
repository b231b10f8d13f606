#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace ipend {

// Deterministic random stream built on SplitMix64 (Steele/Lea/Flood constants).
//
// Every stochastic draw in the system goes through an RngStream derived from
// the master seed by a (label, indices...) path, so results are a pure
// function of configuration + seed and independent of evaluation order.
//
// Constants:
//   increment 0x9E3779B97F4A7C15 (2^64 / golden ratio)
//   mix:  z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27;
//         z *= 0x94D049BB133111EB; z ^= z>>31
//
// Gaussian variates use the Marsaglia polar method; the second variate of
// each accepted pair is discarded so the stream carries no hidden state.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    // Child stream identified by (this stream's seed, label, indices).
    // Independent of how many values have been drawn from the parent.
    RngStream derive(std::string_view label,
                     std::initializer_list<std::uint64_t> indices = {}) const;

    std::uint64_t base_seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();

    // Uniform on [lo, hi).
    double uniform_in(double lo, double hi);

    // Uniform index in [0, n); plain modulo reduction (bias is negligible
    // for the small n used here and keeps the stream easy to replicate).
    std::uint64_t uniform_index(std::uint64_t n);

    // Standard normal, Marsaglia polar method.
    double gaussian();

  private:
    std::uint64_t seed_;   // identity (derivation base)
    std::uint64_t state_;  // advancing generator state
};

}  // namespace ipend
