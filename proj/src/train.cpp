#include "evflow/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "evflow/geometry.hpp"
#include "evflow/losses.hpp"
#include "evflow/metrics.hpp"
#include "evflow/rng.hpp"

namespace evflow {

LabeledCloud augment_with(const EventCloud& cloud, const std::vector<Vec2>& flows,
                          double theta, double alpha,
                          const std::vector<std::uint32_t>& keep) {
    LabeledCloud out;
    out.cloud.events.reserve(keep.size());
    out.flows.reserve(keep.size());
    for (const std::uint32_t i : keep) {
        Event e = cloud.events[i];
        const Vec2 p = rotate_point({e.x, e.y}, theta);
        e.x = p.x() * alpha;
        e.y = p.y() * alpha;
        out.cloud.events.push_back(e);
        out.flows.push_back(rotate_flow(flows[i], theta));
    }
    return out;
}

LabeledCloud augment(const EventCloud& cloud, const std::vector<Vec2>& flows,
                     const AugmentationConfig& cfg, std::uint64_t seed) {
    RngStream rng(CounterRng::substream(seed, /*tag=*/0x61756766ULL)); // "augf"
    const double theta = cfg.rotation ? rng.uniform(0.0, 2.0 * M_PI) : 0.0;
    const double alpha = rng.uniform(cfg.scale_min, cfg.scale_max);
    const double fraction = rng.uniform(cfg.sample_min, cfg.sample_max);
    const auto kept = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(fraction * static_cast<double>(cloud.size()))));
    const std::vector<std::uint32_t> keep =
        subsample_indices(cloud.size(), kept, rng.bits());
    return augment_with(cloud, flows, theta, alpha, keep);
}

namespace {

// Center-event pool bucketed by log||u|| so the sampler can draw the norm
// log-uniformly over [lognorm_min, lognorm_max].
struct CenterPool {
    static constexpr int kBins = 64;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> bins; // (seq, idx)
    std::vector<int> nonempty;

    CenterPool(const std::vector<LabeledCloud>& dataset, double lo, double hi) {
        bins.resize(kBins);
        const double log_lo = std::log(lo), log_hi = std::log(hi);
        for (std::uint32_t s = 0; s < dataset.size(); ++s) {
            const auto& flows = dataset[s].flows;
            for (std::uint32_t i = 0; i < flows.size(); ++i) {
                const double n = flows[i].norm();
                if (n < lo || n > hi) continue;
                const double frac = (std::log(n) - log_lo) / (log_hi - log_lo);
                int b = static_cast<int>(frac * kBins);
                b = std::clamp(b, 0, kBins - 1);
                bins[static_cast<std::size_t>(b)].emplace_back(s, i);
            }
        }
        for (int b = 0; b < kBins; ++b)
            if (!bins[static_cast<std::size_t>(b)].empty()) nonempty.push_back(b);
        if (nonempty.empty()) throw EmptyDataset("no events with flow norm in sampling range");
    }

    std::pair<std::uint32_t, std::uint32_t> draw(RngStream& rng) const {
        const auto& bin = bins[static_cast<std::size_t>(
            nonempty[static_cast<std::size_t>(rng.below(nonempty.size()))])];
        return bin[static_cast<std::size_t>(rng.below(bin.size()))];
    }
};

// Slice [t_c - slice/2, t_c + slice/2) around a center event, re-zeroed to
// the window start.
LabeledCloud slice_around(const LabeledCloud& seq, std::uint32_t center, double slice) {
    const double tc = seq.cloud.events[center].t;
    const double t_lo = tc - 0.5 * slice;
    const double t_hi = tc + 0.5 * slice;
    const auto& ev = seq.cloud.events;
    auto lo = std::lower_bound(ev.begin(), ev.end(), t_lo,
                               [](const Event& e, double t) { return e.t < t; });
    auto hi = std::lower_bound(ev.begin(), ev.end(), t_hi,
                               [](const Event& e, double t) { return e.t < t; });
    LabeledCloud out;
    const auto begin = static_cast<std::size_t>(lo - ev.begin());
    const auto end = static_cast<std::size_t>(hi - ev.begin());
    out.cloud.events.reserve(end - begin);
    out.flows.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        Event e = ev[i];
        e.t -= t_lo;
        out.cloud.events.push_back(e);
        out.flows.push_back(seq.flows[i]);
    }
    return out;
}

} // namespace

TrainedModel train(const std::vector<LabeledCloud>& dataset, const TrainConfig& cfg,
                   const AugmentationConfig& aug, std::ostream* log) {
    if (dataset.empty()) throw EmptyDataset("no training sequences");
    std::size_t total = 0;
    for (const auto& seq : dataset) total += seq.cloud.size();
    if (total == 0) throw EmptyDataset("training sequences are empty");

    const CenterPool pool(dataset, cfg.lognorm_min, cfg.lognorm_max);

    TrainedModel model;
    model.d = cfg.d;
    model.projection_seed = CounterRng::substream(cfg.seed, /*tag=*/0x70726f6aULL);
    const RandomProjection proj = RandomProjection::generate(model.projection_seed, cfg.d);
    model.mlp = MlpParams::init(2 * cfg.d, cfg.hidden, 2,
                                CounterRng::substream(cfg.seed, /*tag=*/0x696e6974ULL));

    AdamState adam(model.mlp, cfg.learning_rate);
    MlpGrads grads = MlpGrads::zeros_like(model.mlp);

    long step_counter = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        double epoch_pee = 0.0;
        std::size_t epoch_events = 0;
        std::size_t epoch_pee_events = 0;

        for (int step = 0; step < cfg.steps_per_epoch; ++step, ++step_counter) {
            RngStream rng(CounterRng::substream(
                cfg.seed, 0x73746570ULL ^ static_cast<std::uint64_t>(step_counter)));

            const auto [seq_idx, center] = pool.draw(rng);
            LabeledCloud batch = slice_around(dataset[seq_idx], center, cfg.slice);
            if (batch.cloud.size() == 0) continue;

            batch = augment(batch.cloud, batch.flows, aug, rng.bits());
            if (batch.cloud.size() > cfg.max_events_per_slice) {
                const auto keep = subsample_indices(batch.cloud.size(),
                                                    cfg.max_events_per_slice, rng.bits());
                batch = augment_with(batch.cloud, batch.flows, 0.0, 1.0, keep);
            }

            const Adjacency adj = build_adjacency(batch.cloud, cfg.neighborhood);
            const Encoding enc = encode(batch.cloud, adj, cfg.neighborhood, proj);
            const Eigen::MatrixXf input = pack_encoding_rows(enc, 0, enc.n);

            ForwardCache cache;
            const Eigen::MatrixXf pred = mlp_forward_cached(input, model.mlp, cache);

            Eigen::MatrixXf grad_out = Eigen::MatrixXf::Zero(pred.rows(), 2);
            double step_loss = 0.0;
            std::size_t contributing = 0;
            for (Eigen::Index i = 0; i < pred.rows(); ++i) {
                const Vec2 u = batch.flows[static_cast<std::size_t>(i)];
                const Vec2 n_hat{static_cast<double>(pred(i, 0)), static_cast<double>(pred(i, 1))};
                const LossTerm term = cfg.use_baseline_loss
                                          ? baseline_norm_direction_loss_grad(u, n_hat, cfg.epsilon)
                                          : motion_field_loss_grad(u, n_hat, cfg.epsilon);
                if (!term.contributes) continue;
                grad_out(i, 0) = static_cast<float>(term.grad.x());
                grad_out(i, 1) = static_cast<float>(term.grad.y());
                step_loss += term.value;
                ++contributing;
                if (const auto e = pee(u, n_hat)) {
                    epoch_pee += *e;
                    ++epoch_pee_events;
                }
            }
            if (contributing == 0) continue;
            grad_out /= static_cast<float>(contributing);

            for (auto& g : grads.w) g.setZero();
            for (auto& g : grads.b) g.setZero();
            mlp_backward(grad_out, model.mlp, cache, grads);
            adam.step(model.mlp, grads);

            epoch_loss += step_loss;
            epoch_events += contributing;
        }

        if (log && epoch_events > 0) {
            const double mean_loss = epoch_loss / static_cast<double>(epoch_events);
            const double mean_pee =
                epoch_pee_events > 0 ? epoch_pee / static_cast<double>(epoch_pee_events) : 0.0;
            (*log) << epoch << "," << mean_loss << "," << mean_pee << "\n";
        }
    }
    return model;
}

} // namespace evflow
