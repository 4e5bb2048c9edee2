#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "evflow/errors.hpp"

namespace evflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// One camera event in normalized camera coordinates (focal length 1).
/// Polarity is parsed and stored but ignored by all downstream math.
struct Event {
    double t = 0.0;   ///< seconds, relative to window start
    double x = 0.0;
    double y = 0.0;
    std::int8_t polarity = 1;   ///< -1 or +1
};

/// Time-ordered event sequence.
struct EventCloud {
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
    bool sorted_by_time() const {
        for (std::size_t i = 1; i < events.size(); ++i)
            if (events[i].t < events[i - 1].t) return false;
        return true;
    }
};

/// Pinhole intrinsics with Brown-Conrady distortion (3 radial + 2 tangential).
struct CameraModel {
    double fx = 1.0, fy = 1.0;   ///< focal lengths, pixels
    double cx = 0.0, cy = 0.0;   ///< principal point, pixels
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    double p1 = 0.0, p2 = 0.0;
    int width = 1, height = 1;   ///< sensor size, pixels
};

/// Frame-based flow stack: per-timestamp 2-channel displacement grids in raw
/// pixel coordinates (pixels of displacement between consecutive frames).
struct FlowFrameStack {
    std::vector<double> timestamps;               ///< strictly increasing
    std::vector<Eigen::MatrixXd> flow_x;          ///< one grid per timestamp, height x width
    std::vector<Eigen::MatrixXd> flow_y;

    std::size_t frame_count() const { return timestamps.size(); }
};

/// Per-event optical flow, normalized pixels per second.
struct PerEventFlow {
    Vec2 u = Vec2::Zero();
};

/// Camera translation direction and angular velocity.
struct RigidMotion {
    Vec3 v = Vec3::Zero();       ///< translation (direction, or scaled m/s)
    Vec3 omega = Vec3::Zero();   ///< angular velocity, rad/s
};

} // namespace evflow
