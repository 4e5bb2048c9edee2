#include "evflow/uq.hpp"

#include <cmath>

#include "evflow/geometry.hpp"
#include "evflow/losses.hpp"

namespace evflow {

Predictor make_model_predictor(const MlpParams& params, const RandomProjection& proj,
                               const NeighborhoodSpec& spec) {
    return [params, proj, spec](const EventCloud& cloud) {
        const Adjacency adj = build_adjacency(cloud, spec);
        const Encoding enc = encode(cloud, adj, spec, proj);
        const Eigen::MatrixXf out = mlp_forward(pack_encoding_rows(enc, 0, enc.n), params);
        std::vector<Vec2> pred(cloud.size());
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            pred[static_cast<std::size_t>(i)] = {static_cast<double>(out(i, 0)),
                                                 static_cast<double>(out(i, 1))};
        return pred;
    };
}

std::vector<std::vector<Vec2>> ensemble_predict(const EventCloud& cloud,
                                                const Predictor& predictor,
                                                const EnsembleConfig& cfg) {
    const std::size_t n = cloud.size();
    std::vector<std::vector<Vec2>> stacks(n, std::vector<Vec2>());
    for (auto& s : stacks) s.reserve(static_cast<std::size_t>(cfg.k));

    for (int j = 0; j < cfg.k; ++j) {
        const double theta = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(cfg.k);
        EventCloud rotated;
        rotated.events.reserve(n);
        for (const Event& e : cloud.events) {
            Event r = e;
            const Vec2 p = rotate_point({e.x, e.y}, theta);
            r.x = p.x();
            r.y = p.y();
            rotated.events.push_back(r);
        }
        const std::vector<Vec2> pred = predictor(rotated);
        for (std::size_t i = 0; i < n; ++i)
            stacks[i].push_back(derotate_flow(pred[i], theta));
    }
    return stacks;
}

namespace {

// Rbar below this is a fully cancelled (antipodal) ensemble up to rounding.
constexpr double kZeroResultant = 1e-12;

double std_from_rbar(double rbar) {
    if (rbar <= kZeroResultant) return std::numeric_limits<double>::infinity();
    if (rbar >= 1.0) return 0.0;
    return std::sqrt(-2.0 * std::log(rbar));
}

} // namespace

double circular_std(const std::vector<double>& angles) {
    if (angles.size() < 2)
        throw TooFewSamples("circular_std needs at least 2 angles");
    double sx = 0.0, sy = 0.0;
    for (const double a : angles) {
        sx += std::cos(a);
        sy += std::sin(a);
    }
    return std_from_rbar(std::hypot(sx, sy) / static_cast<double>(angles.size()));
}

NormalFlowPrediction aggregate(const std::vector<Vec2>& ensemble, const EnsembleConfig& cfg) {
    if (ensemble.size() < 2)
        throw TooFewSamples("aggregate needs an ensemble of at least 2");

    NormalFlowPrediction out;
    double mag = 0.0;
    double sx = 0.0, sy = 0.0;
    std::size_t directional = 0;
    for (const Vec2& v : ensemble) {
        const double n = v.norm();
        mag += n;
        if (n < kDegenerateNorm) continue;   // angle of a zero vector is undefined
        sx += v.x() / n;
        sy += v.y() / n;
        ++directional;
    }
    mag /= static_cast<double>(ensemble.size());

    if (directional < 2) {
        out.sigma = std::numeric_limits<double>::infinity();
        out.valid = false;
        out.n_hat = Vec2::Zero();
        return out;
    }

    out.sigma = std_from_rbar(std::hypot(sx, sy) / static_cast<double>(directional));

    const double dir = std::atan2(sy, sx);
    out.n_hat = {mag * std::cos(dir), mag * std::sin(dir)};
    out.valid = out.sigma <= cfg.threshold;
    return out;
}

std::vector<NormalFlowPrediction> infer_cloud(const EventCloud& cloud,
                                              const MlpParams& params,
                                              const RandomProjection& proj,
                                              const NeighborhoodSpec& spec,
                                              const EnsembleConfig& cfg) {
    std::vector<NormalFlowPrediction> out(cloud.size());
    const Predictor predictor = make_model_predictor(params, proj, spec);
    if (cfg.k <= 1) {
        const std::vector<Vec2> pred = predictor(cloud);
        for (std::size_t i = 0; i < pred.size(); ++i)
            out[i] = NormalFlowPrediction{pred[i], 0.0, true};
        return out;
    }
    const auto stacks = ensemble_predict(cloud, predictor, cfg);
    for (std::size_t i = 0; i < stacks.size(); ++i)
        out[i] = aggregate(stacks[i], cfg);
    return out;
}

} // namespace evflow
