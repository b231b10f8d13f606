#include "ipend/rng.hpp"

#include <cmath>

namespace ipend {

namespace {

constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// FNV-1a over the label bytes, then finalized through the SplitMix64 mixer.
constexpr std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return mix64(h);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

RngStream RngStream::derive(std::string_view label,
                            std::initializer_list<std::uint64_t> indices) const {
    std::uint64_t h = mix64(seed_ ^ hash_label(label));
    for (std::uint64_t idx : indices) {
        h = mix64(h ^ (idx + kIncrement));
    }
    return RngStream(h);
}

std::uint64_t RngStream::next_u64() {
    state_ += kIncrement;
    return mix64(state_);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_in(double lo, double hi) {
    return lo + uniform() * (hi - lo);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    const std::uint64_t draw = next_u64();  // always consume one value
    return n == 0 ? 0 : draw % n;
}

double RngStream::gaussian() {
    while (true) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace ipend
