#pragma once

#include <cstdint>
#include <vector>

#include "evflow/types.hpp"
#include "evflow/veckm.hpp"

namespace evflow {

/**
 * Per-event prediction head: a real MLP over the concatenated (real, imag)
 * parts of an encoding row, 2d -> hidden layers -> 2, rectifier activations.
 */
struct MlpParams {
    struct Layer {
        Eigen::MatrixXf w;   ///< out x in, row-major semantics via Eigen default
        Eigen::VectorXf b;
    };
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols()); }
    int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().w.rows()); }

    /// He-normal weights, zero biases, deterministic in the seed.
    static MlpParams init(int input_dim, const std::vector<int>& hidden, int output_dim,
                          std::uint64_t seed);
};

/// Default hidden widths of the prediction head.
inline const std::vector<int> kDefaultHidden{256, 256, 256};

/// Pack encoding rows [begin, end) into a (end-begin) x 2d float matrix:
/// real parts first, imaginary parts second.
Eigen::MatrixXf pack_encoding_rows(const Encoding& enc, std::size_t begin, std::size_t end);

/// Batched forward pass; input is batch x 2d, output batch x 2.
/// Throws ShapeMismatch when the input width does not match the first layer.
Eigen::MatrixXf mlp_forward(const Eigen::MatrixXf& input, const MlpParams& p);

/// Single-row forward returning the predicted normal flow.
Vec2 forward(const Encoding& enc, std::size_t row, const MlpParams& p);

/// Activations recorded by the training-time forward pass.
struct ForwardCache {
    std::vector<Eigen::MatrixXf> inputs;   ///< input to each layer
    Eigen::MatrixXf output;
};

struct MlpGrads {
    std::vector<Eigen::MatrixXf> w;
    std::vector<Eigen::VectorXf> b;

    static MlpGrads zeros_like(const MlpParams& p);
};

Eigen::MatrixXf mlp_forward_cached(const Eigen::MatrixXf& input, const MlpParams& p,
                                   ForwardCache& cache);

/// Backprop of d(loss)/d(output) through the cached forward pass.
void mlp_backward(const Eigen::MatrixXf& grad_output, const MlpParams& p,
                  const ForwardCache& cache, MlpGrads& grads);

/// Adam optimizer state (beta1=0.9, beta2=0.999, bias-corrected).
class AdamState {
public:
    AdamState(const MlpParams& p, float lr);

    void step(MlpParams& p, const MlpGrads& grads);

private:
    float lr_;
    long t_ = 0;
    std::vector<Eigen::MatrixXf> mw_, vw_;
    std::vector<Eigen::VectorXf> mb_, vb_;
};

} // namespace evflow
