#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "evflow/mlp.hpp"
#include "evflow/types.hpp"
#include "evflow/veckm.hpp"

namespace evflow {

struct AugmentationConfig {
    bool rotation = true;            ///< theta ~ Uniform[0, 2pi)
    double scale_min = 0.75;
    double scale_max = 1.25;
    double sample_min = 0.5;         ///< kept fraction of events
    double sample_max = 1.0;
};

/// Events with their aligned ground-truth optical flow.
struct LabeledCloud {
    EventCloud cloud;
    std::vector<Vec2> flows;
};

/// Deterministic augmentation core: rotate spatial coordinates and flows by
/// theta, scale spatial coordinates by alpha (timestamps and flows unchanged),
/// then keep the given sorted event subset.
LabeledCloud augment_with(const EventCloud& cloud, const std::vector<Vec2>& flows,
                          double theta, double alpha,
                          const std::vector<std::uint32_t>& keep);

/// Sampled augmentation: rotation, scaling, subsampling in that order, all
/// drawn deterministically from the seed.
LabeledCloud augment(const EventCloud& cloud, const std::vector<Vec2>& flows,
                     const AugmentationConfig& cfg, std::uint64_t seed);

struct TrainConfig {
    double epsilon = 0.1;            ///< radial-loss epsilon
    float learning_rate = 1e-3f;
    int epochs = 30;
    int steps_per_epoch = 50;        ///< one 20 ms slice per step
    std::uint64_t seed = 0;
    double lognorm_min = 0.01;       ///< center-event sampling range of ||u||
    double lognorm_max = 3.0;
    double slice = 0.02;             ///< seconds
    NeighborhoodSpec neighborhood;
    int d = 384;                     ///< encoding dimension
    std::vector<int> hidden = kDefaultHidden;
    bool use_baseline_loss = false;  ///< norm+direction ablation loss
    std::size_t max_events_per_slice = kMaxEventsPerSlice;
};

struct TrainedModel {
    MlpParams mlp;
    std::uint64_t projection_seed = 0;
    int d = 384;
};

/**
 * Mini-batch training with adaptive moments on the motion-field loss.
 * Each step samples a center event so that log||u|| is uniform over the
 * configured range, slices the surrounding window, augments, re-encodes and
 * updates on all events in the slice. Writes one log line per epoch
 * (`epoch,mean_loss,mean_pee_train`) when a log stream is given.
 * Throws EmptyDataset.
 */
TrainedModel train(const std::vector<LabeledCloud>& dataset, const TrainConfig& cfg,
                   const AugmentationConfig& aug, std::ostream* log = nullptr);

} // namespace evflow
