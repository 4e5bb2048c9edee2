#pragma once

#include <cstdint>
#include <vector>

#include "evflow/types.hpp"

namespace evflow {

/// Straight scene edge at constant depth. Curved contours are approximated
/// by polylines; a shared endpoint between two segments makes a corner.
struct SceneEdge {
    Vec2 p0 = Vec2::Zero();      ///< normalized-image endpoints
    Vec2 p1 = Vec2::Zero();
    double depth = 1.0;          ///< meters, > 0
    double events_per_length = 1000.0;
};

struct SimWindow {
    double t_start = 0.0;
    double t_end = 0.02;
    double slice = 0.02;         ///< processing slice length, seconds
};

/// Events plus exact per-event ground truth.
struct SimResult {
    EventCloud cloud;
    std::vector<Vec2> flow;         ///< optical flow at emission point
    std::vector<Vec2> normal_flow;  ///< projection onto the transported edge normal
    std::vector<double> depth;
};

/// Instantaneous motion field u = (1/Z) A_x V + B_x Omega at normalized
/// image point x with depth Z. Throws NonPositiveDepth.
Vec2 motion_field(const Vec2& x, double z, const RigidMotion& m);

/// Projection of optical flow onto the edge normal: n = (u.g) g with
/// g perpendicular to edge_dir. Satisfies n.(u-n) = 0.
Vec2 gt_normal_flow(const Vec2& u, const Vec2& edge_dir);

/**
 * Deterministic scene simulation. Edge points are placed by arclength,
 * transported along their instantaneous motion field with Euler steps of at
 * most 1 ms, and an event with a jittered timestamp is emitted at every step.
 * Ground truth (flow, normal flow, depth) is exact at each emission point.
 * Throws EmptyScene.
 */
SimResult simulate(const std::vector<SceneEdge>& edges, const RigidMotion& m,
                   const SimWindow& w, std::uint64_t seed);

} // namespace evflow
