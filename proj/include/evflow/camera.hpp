#pragma once

#include "evflow/types.hpp"

namespace evflow {

/// Forward Brown-Conrady model: normalized undistorted point -> raw pixel.
Vec2 distort(const Vec2& normalized, const CameraModel& cam);

/**
 * Inverse of distort(): raw pixel -> normalized undistorted coordinates.
 * Fixed-point iteration, at most 20 rounds, stops when the step falls below
 * 1e-10 in normalized units. Throws NonConvergence when the forward residual
 * still exceeds 1e-6 afterwards.
 */
Vec2 undistort_normalize(const Vec2& pixel, const CameraModel& cam);

/**
 * Time-interpolated flow lookup at an event given in raw pixel coordinates.
 * Spatial lookup is nearest-neighbor on the grid; temporal interpolation is
 * the convex combination between the two bracketing frames. Returns pixels
 * of displacement. Throws OutOfRange when e.t is outside the stack timestamps
 * or (x, y) is outside the grid.
 */
Vec2 interpolate_flow(const FlowFrameStack& stack, const Event& e);

/**
 * Per-event flow in normalized pixels per second: undistort the event pixel
 * and its displaced end point, divide the difference by the frame interval.
 */
PerEventFlow per_event_flow(const FlowFrameStack& stack, const CameraModel& cam,
                            const Event& e, double t0, double t1);

/// Effective forward flow grid from a forward/backward frame pair:
/// 0.5 * (forward - backward), evaluated at the later frame.
Eigen::MatrixXd dsec_effective_flow(const Eigen::MatrixXd& forward,
                                    const Eigen::MatrixXd& backward);

} // namespace evflow
