#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace ipend {

// Fixed 4-4-2-1 sigmoid network. Inputs are the state-estimate error
// (x_hat - [r 0 0 0]), each coordinate scaled by its nominal range to
// [-1, 1] and clamped; the scalar output is sigmoid-scaled to [0, 5] V.
namespace arch {
inline constexpr std::array<int, 4> kLayerSizes{4, 4, 2, 1};
inline constexpr int kGenomeDim = 33;          // (4*4+4) + (4*2+2) + (2*1+1)
inline constexpr double kWeightClamp = 30.0;   // genome entries live in [-30, 30]
inline constexpr double kOutputSpanVolts = 5.0;
// Input half-ranges: p (m), p_dot (m/s), theta (rad), theta_dot (rad/s).
inline constexpr std::array<double, 4> kInputHalfRange{0.5, 5.0, 0.5, 5.0};
}  // namespace arch

// Flat parameter vector, length 33. Layout is layer by layer, each layer
// its row-major weight matrix then its bias vector:
//   [ 0..15] W1 (4x4, row-major)   [16..19] b1
//   [20..27] W2 (2x4, row-major)   [28..29] b2
//   [30..31] W3 (1x2)              [32]     b3
struct MlpGenome {
    std::vector<double> weights;
};

struct MlpWeights {
    Eigen::Matrix4d w1;
    Eigen::Vector4d b1;
    Eigen::Matrix<double, 2, 4> w2;
    Eigen::Vector2d b2;
    Eigen::RowVector2d w3;
    double b3 = 0.0;
};

// Number of parameters for a feed-forward net with bias per neuron.
int genome_dim(const std::vector<int>& layer_sizes);

// Throws CodecError unless the genome has exactly 33 finite entries.
MlpWeights decode_genome(const MlpGenome& genome);

// Inverse of decode_genome; encode(decode(g)) == g elementwise.
MlpGenome encode_genome(const MlpWeights& weights);

// Pure forward pass; returns a voltage in [0, 5] V (the sigmoid keeps it off
// the rails except at numerical saturation under extreme weights).
double mlp_forward(const MlpWeights& weights, const Eigen::Vector4d& x_hat, double r);

// Plain text, one value per line, 33 lines, 17 significant digits
// (round-trip exact for doubles). Throws IoError on filesystem failure,
// CodecError on wrong shape or an unparseable line.
void save_genome(const MlpGenome& genome, const std::filesystem::path& path);
MlpGenome load_genome(const std::filesystem::path& path);

}  // namespace ipend
