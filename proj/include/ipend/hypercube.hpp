#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ipend {

// Axis-aligned box over (p, p_dot, theta, theta_dot), expressed relative to
// the regulation point [r 0 0 0]. Closed region: boundaries are inside.
struct Hypercube {
    std::array<double, 4> lo{};
    std::array<double, 4> hi{};
};

// Box with half-widths (p, p_dot, theta, theta_dot) centered at the origin.
Hypercube symmetric_box(double p, double p_dot, double theta, double theta_dot);

// Throws ConfigError unless lo <= hi per dimension and all bounds finite.
// `where` prefixes the field path in the message (e.g. "switch.omega_nhc").
void validate(const Hypercube& h, const std::string& where);

// True iff every component of (state - [reference 0 0 0]) lies in
// [lo, hi] inclusive.
bool contains(const Hypercube& h, const Eigen::Vector4d& state, double reference);

bool is_subset(const Hypercube& inner, const Hypercube& outer);

// Scale the box about its center by `factor` (>= 0).
Hypercube inflate(const Hypercube& h, double factor);

// Smallest box containing both arguments (per-dimension union of bounds).
Hypercube envelope(const Hypercube& a, const Hypercube& b);

// Shrink each dimension of `h` to lie within `bounds`.
Hypercube clamp_to(const Hypercube& h, const Hypercube& bounds);

// Per-dimension nearest-rank quantile box: bounds are the (1-coverage)/2
// and 1-(1-coverage)/2 empirical quantiles, where the q-quantile of N
// sorted samples is element max(1, ceil(q*N)) (1-based). coverage = 1
// gives the exact min/max. Requires >= 100 samples and coverage in (0, 1];
// throws MetricError otherwise. Samples must already be reference-relative.
Hypercube calibrate_region(const std::vector<Eigen::Vector4d>& log, double coverage);

// Region file: "lo hi" per dimension plus provenance, round-trip exact.
struct RegionFile {
    Hypercube cube;
    double coverage = 0.0;
    std::string source;  // free-form provenance (e.g. originating CSV)
};

void save_region(const RegionFile& region, const std::filesystem::path& path);
RegionFile load_region(const std::filesystem::path& path);

}  // namespace ipend
