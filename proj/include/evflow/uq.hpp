#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "evflow/mlp.hpp"
#include "evflow/types.hpp"
#include "evflow/veckm.hpp"

namespace evflow {

struct EnsembleConfig {
    int k = 5;                 ///< ensemble size; K evenly spaced angles 2*pi*j/K
    double threshold = 0.3;    ///< circular-std validity cutoff
};

struct NormalFlowPrediction {
    Vec2 n_hat = Vec2::Zero();
    double sigma = 0.0;        ///< circular std of the ensemble directions
    bool valid = false;
};

/// Maps a cloud to one prediction per event. Mock predictors plug in here
/// for testing; make_model_predictor wires the real encoder + head.
using Predictor = std::function<std::vector<Vec2>(const EventCloud&)>;

Predictor make_model_predictor(const MlpParams& params, const RandomProjection& proj,
                               const NeighborhoodSpec& spec);

/// Rotation-ensemble inference: for each angle, rotate the cloud, predict,
/// and de-rotate the outputs. Returns per-event stacks of K predictions.
std::vector<std::vector<Vec2>> ensemble_predict(const EventCloud& cloud,
                                                const Predictor& predictor,
                                                const EnsembleConfig& cfg);

/// Circular standard deviation sqrt(-2 ln Rbar) of a set of angles (radians).
/// Rbar = 0 returns +infinity (always masked). Throws TooFewSamples for < 2.
double circular_std(const std::vector<double>& angles);

/// Polar-coordinate ensemble average: circular-mean direction, arithmetic
/// mean magnitude, circular-std uncertainty, validity against the threshold.
/// Members with near-zero magnitude are excluded from the angle statistics;
/// the event is invalid when fewer than two remain.
NormalFlowPrediction aggregate(const std::vector<Vec2>& ensemble, const EnsembleConfig& cfg);

/// Full per-cloud inference. K = 1 bypasses the ensemble: sigma is the
/// 0 sentinel and every prediction is valid.
std::vector<NormalFlowPrediction> infer_cloud(const EventCloud& cloud,
                                              const MlpParams& params,
                                              const RandomProjection& proj,
                                              const NeighborhoodSpec& spec,
                                              const EnsembleConfig& cfg);

} // namespace evflow
