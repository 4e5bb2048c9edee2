#pragma once

#include <optional>
#include <vector>

#include "evflow/types.hpp"

namespace evflow {

/// Aggregate flow-evaluation report over one or more windows.
struct FlowEvalReport {
    double pee_mean = 0.0;
    double pos_pct = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_masked = 0;
};

/// Projection endpoint error |u.n/||n|| - ||n|||. Returns nullopt for
/// zero-magnitude predictions; callers count those as masked.
std::optional<double> pee(const Vec2& u, const Vec2& n_hat);

/// Percentage of pairs with u.n > 0. Throws EmptyInput on an empty list.
double pos_pct(const std::vector<std::pair<Vec2, Vec2>>& pairs);

/// RMS translation-velocity error: each unit estimate is scaled by the
/// ground-truth speed before differencing. Throws LengthMismatch.
double rms_velocity(const std::vector<Vec3>& estimates, const std::vector<Vec3>& gt);

/// Mean PEE + %Pos over aligned (u, n_hat) pairs, masking zero predictions.
FlowEvalReport evaluate_flow(const std::vector<Vec2>& gt_u, const std::vector<Vec2>& pred_n);

} // namespace evflow
