#include "ipend/hypercube.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ipend/errors.hpp"

namespace ipend {

namespace {

const char* kDimNames[4] = {"p", "p_dot", "theta", "theta_dot"};

// 1-based nearest rank of the q-quantile among n sorted samples.
std::size_t nearest_rank(double q, std::size_t n) {
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    return std::max<std::size_t>(1, std::min(rank, n));
}

}  // namespace

Hypercube symmetric_box(double p, double p_dot, double theta, double theta_dot) {
    Hypercube h;
    h.lo = {-p, -p_dot, -theta, -theta_dot};
    h.hi = {p, p_dot, theta, theta_dot};
    return h;
}

void validate(const Hypercube& h, const std::string& where) {
    for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(h.lo[i]) || !std::isfinite(h.hi[i])) {
            throw ConfigError(where + "." + kDimNames[i] + ": bounds must be finite");
        }
        if (h.lo[i] > h.hi[i]) {
            throw ConfigError(where + "." + kDimNames[i] + ": lo exceeds hi");
        }
    }
}

bool contains(const Hypercube& h, const Eigen::Vector4d& state, double reference) {
    const Eigen::Vector4d rel = state - Eigen::Vector4d(reference, 0.0, 0.0, 0.0);
    for (int i = 0; i < 4; ++i) {
        if (rel(i) < h.lo[i] || rel(i) > h.hi[i]) return false;
    }
    return true;
}

bool is_subset(const Hypercube& inner, const Hypercube& outer) {
    for (int i = 0; i < 4; ++i) {
        if (inner.lo[i] < outer.lo[i] || inner.hi[i] > outer.hi[i]) return false;
    }
    return true;
}

Hypercube inflate(const Hypercube& h, double factor) {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        throw ConfigError("inflate: factor must be finite and nonnegative");
    }
    Hypercube out;
    for (int i = 0; i < 4; ++i) {
        const double center = 0.5 * (h.lo[i] + h.hi[i]);
        const double half = 0.5 * (h.hi[i] - h.lo[i]) * factor;
        out.lo[i] = center - half;
        out.hi[i] = center + half;
    }
    return out;
}

Hypercube envelope(const Hypercube& a, const Hypercube& b) {
    Hypercube out;
    for (int i = 0; i < 4; ++i) {
        out.lo[i] = std::min(a.lo[i], b.lo[i]);
        out.hi[i] = std::max(a.hi[i], b.hi[i]);
    }
    return out;
}

Hypercube clamp_to(const Hypercube& h, const Hypercube& bounds) {
    Hypercube out;
    for (int i = 0; i < 4; ++i) {
        out.lo[i] = std::clamp(h.lo[i], bounds.lo[i], bounds.hi[i]);
        out.hi[i] = std::clamp(h.hi[i], bounds.lo[i], bounds.hi[i]);
    }
    return out;
}

Hypercube calibrate_region(const std::vector<Eigen::Vector4d>& log, double coverage) {
    if (log.size() < 100) {
        throw MetricError("calibrate_region: need at least 100 samples, got " +
                          std::to_string(log.size()));
    }
    if (!(coverage > 0.0) || !(coverage <= 1.0)) {
        throw MetricError("calibrate_region: coverage must be in (0, 1]");
    }
    const double tail = (1.0 - coverage) / 2.0;
    Hypercube h;
    std::vector<double> dim(log.size());
    for (int i = 0; i < 4; ++i) {
        for (std::size_t k = 0; k < log.size(); ++k) dim[k] = log[k](i);
        std::sort(dim.begin(), dim.end());
        // tail = 0 -> rank clamps to 1 -> exact minimum; symmetric at the top.
        h.lo[i] = dim[nearest_rank(tail, dim.size()) - 1];
        h.hi[i] = dim[nearest_rank(1.0 - tail, dim.size()) - 1];
    }
    return h;
}

void save_region(const RegionFile& region, const std::filesystem::path& path) {
    validate(region.cube, "region");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open region file for writing: " + path.string());
    char buf[160];
    std::snprintf(buf, sizeof buf, "# coverage: %.17g\n", region.coverage);
    out << buf;
    out << "# source: " << region.source << "\n";
    for (int i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", region.cube.lo[i], region.cube.hi[i]);
        out << buf;
    }
    if (!out.flush()) throw IoError("failed writing region file: " + path.string());
}

RegionFile load_region(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open region file: " + path.string());
    RegionFile region;
    std::string line;
    int lineno = 0;
    int dim = 0;
    bool have_coverage = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream meta(line.substr(1));
            std::string key;
            meta >> key;
            if (key == "coverage:") {
                if (!(meta >> region.coverage)) {
                    throw CodecError(path.string() + ":" + std::to_string(lineno) +
                                     ": bad coverage value");
                }
                have_coverage = true;
            } else if (key == "source:") {
                std::string rest;
                std::getline(meta, rest);
                const auto start = rest.find_first_not_of(' ');
                region.source = start == std::string::npos ? "" : rest.substr(start);
            }
            continue;
        }
        if (dim >= 4) {
            throw CodecError(path.string() + ":" + std::to_string(lineno) +
                             ": more than 4 bound lines");
        }
        std::istringstream row(line);
        if (!(row >> region.cube.lo[dim] >> region.cube.hi[dim])) {
            throw CodecError(path.string() + ":" + std::to_string(lineno) +
                             ": expected 'lo hi'");
        }
        ++dim;
    }
    if (dim != 4) {
        throw CodecError(path.string() + ": expected 4 bound lines, got " + std::to_string(dim));
    }
    if (!have_coverage) {
        throw CodecError(path.string() + ": missing '# coverage:' line");
    }
    validate(region.cube, "region");
    return region;
}

}  // namespace ipend
