#include "ipend/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "ipend/errors.hpp"

namespace ipend {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_shape(const MlpGenome& genome) {
    if (genome.weights.size() != static_cast<std::size_t>(arch::kGenomeDim)) {
        throw CodecError("genome: expected " + std::to_string(arch::kGenomeDim) +
                         " values, got " + std::to_string(genome.weights.size()));
    }
    for (std::size_t i = 0; i < genome.weights.size(); ++i) {
        if (!std::isfinite(genome.weights[i])) {
            throw CodecError("genome: non-finite entry at index " + std::to_string(i));
        }
    }
}

}  // namespace

int genome_dim(const std::vector<int>& layer_sizes) {
    int dim = 0;
    for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
        dim += layer_sizes[i] * layer_sizes[i + 1] + layer_sizes[i + 1];
    }
    return dim;
}

MlpWeights decode_genome(const MlpGenome& genome) {
    check_shape(genome);
    const double* g = genome.weights.data();
    MlpWeights w;
    int k = 0;
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col) w.w1(row, col) = g[k++];
    for (int row = 0; row < 4; ++row) w.b1(row) = g[k++];
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 4; ++col) w.w2(row, col) = g[k++];
    for (int row = 0; row < 2; ++row) w.b2(row) = g[k++];
    for (int col = 0; col < 2; ++col) w.w3(col) = g[k++];
    w.b3 = g[k++];
    return w;
}

MlpGenome encode_genome(const MlpWeights& weights) {
    MlpGenome genome;
    genome.weights.reserve(arch::kGenomeDim);
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col) genome.weights.push_back(weights.w1(row, col));
    for (int row = 0; row < 4; ++row) genome.weights.push_back(weights.b1(row));
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 4; ++col) genome.weights.push_back(weights.w2(row, col));
    for (int row = 0; row < 2; ++row) genome.weights.push_back(weights.b2(row));
    for (int col = 0; col < 2; ++col) genome.weights.push_back(weights.w3(col));
    genome.weights.push_back(weights.b3);
    return genome;
}

double mlp_forward(const MlpWeights& weights, const Eigen::Vector4d& x_hat, double r) {
    const Eigen::Vector4d x_ref(r, 0.0, 0.0, 0.0);
    Eigen::Vector4d in;
    for (int i = 0; i < 4; ++i) {
        in(i) = std::clamp((x_hat(i) - x_ref(i)) / arch::kInputHalfRange[i], -1.0, 1.0);
    }
    const Eigen::Vector4d h1 = (weights.w1 * in + weights.b1).unaryExpr(&sigmoid);
    const Eigen::Vector2d h2 = (weights.w2 * h1 + weights.b2).unaryExpr(&sigmoid);
    return arch::kOutputSpanVolts * sigmoid(weights.w3.dot(h2) + weights.b3);
}

void save_genome(const MlpGenome& genome, const std::filesystem::path& path) {
    check_shape(genome);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open genome file for writing: " + path.string());
    char buf[64];
    for (double v : genome.weights) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
    if (!out.flush()) throw IoError("failed writing genome file: " + path.string());
}

MlpGenome load_genome(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open genome file: " + path.string());
    MlpGenome genome;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(line, &pos);
        } catch (const std::exception&) {
            throw CodecError(path.string() + ":" + std::to_string(lineno) +
                             ": not a number: '" + line + "'");
        }
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos != line.size()) {
            throw CodecError(path.string() + ":" + std::to_string(lineno) +
                             ": trailing garbage: '" + line + "'");
        }
        genome.weights.push_back(v);
    }
    if (genome.weights.size() != static_cast<std::size_t>(arch::kGenomeDim)) {
        throw CodecError(path.string() + ": expected " + std::to_string(arch::kGenomeDim) +
                         " lines, got " + std::to_string(genome.weights.size()));
    }
    check_shape(genome);
    return genome;
}

}  // namespace ipend
