#include "evflow/mlp.hpp"

#include <cmath>
#include <string>

#include "evflow/rng.hpp"

namespace evflow {

MlpParams MlpParams::init(int input_dim, const std::vector<int>& hidden, int output_dim,
                          std::uint64_t seed) {
    MlpParams p;
    std::vector<int> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(output_dim);

    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        Layer layer;
        layer.w.resize(out, in);
        layer.b = Eigen::VectorXf::Zero(out);
        const CounterRng rng(CounterRng::substream(seed, 0x6d6c7000ULL + l)); // "mlp"+layer
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c)
                layer.w(r, c) = static_cast<float>(
                    scale * rng.normal(static_cast<std::uint64_t>(r) * in + c));
        p.layers.push_back(std::move(layer));
    }
    return p;
}

Eigen::MatrixXf pack_encoding_rows(const Encoding& enc, std::size_t begin, std::size_t end) {
    const auto d = static_cast<std::size_t>(enc.d);
    Eigen::MatrixXf x(static_cast<Eigen::Index>(end - begin), static_cast<Eigen::Index>(2 * d));
    for (std::size_t r = begin; r < end; ++r) {
        const double* re = enc.re.data() + r * d;
        const double* im = enc.im.data() + r * d;
        const auto row = static_cast<Eigen::Index>(r - begin);
        for (std::size_t m = 0; m < d; ++m) {
            x(row, static_cast<Eigen::Index>(m)) = static_cast<float>(re[m]);
            x(row, static_cast<Eigen::Index>(d + m)) = static_cast<float>(im[m]);
        }
    }
    return x;
}

Eigen::MatrixXf mlp_forward(const Eigen::MatrixXf& input, const MlpParams& p) {
    if (p.layers.empty() || input.cols() != p.layers.front().w.cols())
        throw ShapeMismatch("mlp input width " + std::to_string(input.cols()) +
                            " does not match first layer " +
                            std::to_string(p.layers.empty() ? 0 : p.layers.front().w.cols()));
    Eigen::MatrixXf h = input;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        h = (h * p.layers[l].w.transpose()).rowwise() + p.layers[l].b.transpose();
        if (l + 1 < p.layers.size()) h = h.cwiseMax(0.0f);
    }
    return h;
}

Vec2 forward(const Encoding& enc, std::size_t row, const MlpParams& p) {
    const Eigen::MatrixXf x = pack_encoding_rows(enc, row, row + 1);
    const Eigen::MatrixXf y = mlp_forward(x, p);
    return {static_cast<double>(y(0, 0)), static_cast<double>(y(0, 1))};
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
    MlpGrads g;
    for (const auto& layer : p.layers) {
        g.w.emplace_back(Eigen::MatrixXf::Zero(layer.w.rows(), layer.w.cols()));
        g.b.emplace_back(Eigen::VectorXf::Zero(layer.b.size()));
    }
    return g;
}

Eigen::MatrixXf mlp_forward_cached(const Eigen::MatrixXf& input, const MlpParams& p,
                                   ForwardCache& cache) {
    if (p.layers.empty() || input.cols() != p.layers.front().w.cols())
        throw ShapeMismatch("mlp input width does not match first layer");
    cache.inputs.clear();
    Eigen::MatrixXf h = input;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        cache.inputs.push_back(h);
        h = (h * p.layers[l].w.transpose()).rowwise() + p.layers[l].b.transpose();
        if (l + 1 < p.layers.size()) h = h.cwiseMax(0.0f);
    }
    cache.output = h;
    return h;
}

void mlp_backward(const Eigen::MatrixXf& grad_output, const MlpParams& p,
                  const ForwardCache& cache, MlpGrads& grads) {
    Eigen::MatrixXf delta = grad_output;
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        if (l + 1 < p.layers.size()) {
            // Rectifier mask: the stored input of layer l+1 is relu output.
            delta = delta.cwiseProduct(
                (cache.inputs[l + 1].array() > 0.0f).cast<float>().matrix());
        }
        grads.w[l] += delta.transpose() * cache.inputs[l];
        grads.b[l] += delta.colwise().sum().transpose();
        if (l > 0) delta = delta * p.layers[l].w;
    }
}

AdamState::AdamState(const MlpParams& p, float lr) : lr_(lr) {
    for (const auto& layer : p.layers) {
        mw_.emplace_back(Eigen::MatrixXf::Zero(layer.w.rows(), layer.w.cols()));
        vw_.emplace_back(Eigen::MatrixXf::Zero(layer.w.rows(), layer.w.cols()));
        mb_.emplace_back(Eigen::VectorXf::Zero(layer.b.size()));
        vb_.emplace_back(Eigen::VectorXf::Zero(layer.b.size()));
    }
}

void AdamState::step(MlpParams& p, const MlpGrads& grads) {
    constexpr float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
    ++t_;
    const float c1 = 1.0f - std::pow(beta1, static_cast<float>(t_));
    const float c2 = 1.0f - std::pow(beta2, static_cast<float>(t_));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        mw_[l] = beta1 * mw_[l] + (1.0f - beta1) * grads.w[l];
        vw_[l] = beta2 * vw_[l] + (1.0f - beta2) * grads.w[l].cwiseProduct(grads.w[l]);
        p.layers[l].w.array() -=
            lr_ * (mw_[l].array() / c1) / ((vw_[l].array() / c2).sqrt() + eps);

        mb_[l] = beta1 * mb_[l] + (1.0f - beta1) * grads.b[l];
        vb_[l] = beta2 * vb_[l] + (1.0f - beta2) * grads.b[l].cwiseProduct(grads.b[l]);
        p.layers[l].b.array() -=
            lr_ * (mb_[l].array() / c1) / ((vb_[l].array() / c2).sqrt() + eps);
    }
}

} // namespace evflow
