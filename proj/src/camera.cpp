#include "evflow/camera.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace evflow {

namespace {

// Distortion displacement in the normalized plane: returns the distorted
// normalized point for an undistorted normalized (x, y).
Vec2 apply_distortion(const Vec2& p, const CameraModel& cam) {
    const double x = p.x(), y = p.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (cam.k1 + r2 * (cam.k2 + r2 * cam.k3));
    const double xd = x * radial + 2.0 * cam.p1 * x * y + cam.p2 * (r2 + 2.0 * x * x);
    const double yd = y * radial + cam.p1 * (r2 + 2.0 * y * y) + 2.0 * cam.p2 * x * y;
    return {xd, yd};
}

} // namespace

Vec2 distort(const Vec2& normalized, const CameraModel& cam) {
    const Vec2 d = apply_distortion(normalized, cam);
    return {cam.fx * d.x() + cam.cx, cam.fy * d.y() + cam.cy};
}

Vec2 undistort_normalize(const Vec2& pixel, const CameraModel& cam) {
    const Vec2 target{(pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy};
    Vec2 p = target;
    for (int it = 0; it < 20; ++it) {
        // Peel the distortion off the target: x = (xd - tangential) / radial.
        const double r2 = p.squaredNorm();
        const double radial = 1.0 + r2 * (cam.k1 + r2 * (cam.k2 + r2 * cam.k3));
        const double tx = 2.0 * cam.p1 * p.x() * p.y() + cam.p2 * (r2 + 2.0 * p.x() * p.x());
        const double ty = cam.p1 * (r2 + 2.0 * p.y() * p.y()) + 2.0 * cam.p2 * p.x() * p.y();
        const Vec2 next{(target.x() - tx) / radial, (target.y() - ty) / radial};
        const double step = (next - p).norm();
        p = next;
        if (step < 1e-14) break;
    }
    if ((apply_distortion(p, cam) - target).norm() > 1e-6) {
        throw NonConvergence("undistort residual above 1e-6 at pixel (" +
                             std::to_string(pixel.x()) + ", " + std::to_string(pixel.y()) + ")");
    }
    return p;
}

Vec2 interpolate_flow(const FlowFrameStack& stack, const Event& e) {
    if (stack.frame_count() < 2)
        throw OutOfRange("flow stack needs at least two frames");
    const auto& ts = stack.timestamps;
    if (e.t < ts.front() || e.t > ts.back())
        throw OutOfRange("event time " + std::to_string(e.t) + " outside stack range");

    auto hi = std::lower_bound(ts.begin(), ts.end(), e.t);
    std::size_t i1 = static_cast<std::size_t>(hi - ts.begin());
    if (i1 == 0) i1 = 1;
    const std::size_t i0 = i1 - 1;

    const auto& g0x = stack.flow_x[i0];
    const long col = std::lround(e.x);
    const long row = std::lround(e.y);
    if (col < 0 || row < 0 || row >= g0x.rows() || col >= g0x.cols())
        throw OutOfRange("event pixel outside flow grid");

    const double t0 = ts[i0], t1 = ts[i1];
    const double w1 = (e.t - t0) / (t1 - t0);
    const double w0 = (t1 - e.t) / (t1 - t0);
    const double ux = w1 * stack.flow_x[i1](row, col) + w0 * stack.flow_x[i0](row, col);
    const double uy = w1 * stack.flow_y[i1](row, col) + w0 * stack.flow_y[i0](row, col);
    return {ux, uy};
}

PerEventFlow per_event_flow(const FlowFrameStack& stack, const CameraModel& cam,
                            const Event& e, double t0, double t1) {
    const Vec2 disp = interpolate_flow(stack, e);
    const Vec2 start = undistort_normalize({e.x, e.y}, cam);
    const Vec2 end = undistort_normalize({e.x + disp.x(), e.y + disp.y()}, cam);
    return PerEventFlow{(end - start) / (t1 - t0)};
}

Eigen::MatrixXd dsec_effective_flow(const Eigen::MatrixXd& forward,
                                    const Eigen::MatrixXd& backward) {
    return 0.5 * (forward - backward);
}

} // namespace evflow
