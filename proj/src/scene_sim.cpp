#include "evflow/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evflow/geometry.hpp"
#include "evflow/rng.hpp"

namespace evflow {

namespace {

constexpr double kMaxEulerStep = 1e-3;

/// Spatial Jacobian of the motion field at x (depth held constant), used to
/// transport edge directions alongside the points.
Eigen::Matrix2d motion_field_jacobian(const Vec2& x, double z, const RigidMotion& m) {
    Eigen::Matrix2d j;
    const double wx = m.omega.x(), wy = m.omega.y(), wz = m.omega.z();
    j(0, 0) = x.y() * wx - 2.0 * x.x() * wy;
    j(0, 1) = x.x() * wx + wz;
    j(1, 0) = -x.y() * wy - wz;
    j(1, 1) = 2.0 * x.y() * wx - x.x() * wy;
    j(0, 0) += m.v.z() / z;
    j(1, 1) += m.v.z() / z;
    return j;
}

} // namespace

Vec2 motion_field(const Vec2& x, double z, const RigidMotion& m) {
    if (z <= 0.0) throw NonPositiveDepth("depth must be positive, got " + std::to_string(z));
    return (1.0 / z) * (matrix_A(x) * m.v) + matrix_B(x) * m.omega;
}

Vec2 gt_normal_flow(const Vec2& u, const Vec2& edge_dir) {
    const Vec2 g{-edge_dir.y(), edge_dir.x()};
    return u.dot(g) * g;
}

SimResult simulate(const std::vector<SceneEdge>& edges, const RigidMotion& m,
                   const SimWindow& w, std::uint64_t seed) {
    if (edges.empty()) throw EmptyScene("scene has no edges");

    const double duration = w.t_end - w.t_start;
    const auto steps = static_cast<std::size_t>(std::ceil(duration / kMaxEulerStep));
    const double h = duration / static_cast<double>(steps);

    RngStream rng(CounterRng::substream(seed, /*tag=*/0x73696d75ULL)); // "simu"

    struct Sample {
        double t;
        Vec2 pos;
        Vec2 u;
        Vec2 n;
        double z;
        std::int8_t pol;
    };
    std::vector<Sample> samples;

    for (const auto& edge : edges) {
        const double len = (edge.p1 - edge.p0).norm();
        const auto points = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(len * edge.events_per_length)));
        const Vec2 base_dir = (edge.p1 - edge.p0) / len;

        for (std::size_t i = 0; i < points; ++i) {
            const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
            Vec2 pos = edge.p0 + s * (edge.p1 - edge.p0);
            Vec2 dir = base_dir;
            double t = w.t_start;
            for (std::size_t step = 0; step < steps; ++step) {
                const Vec2 u = motion_field(pos, edge.depth, m);
                Sample smp;
                smp.t = t + rng.uniform() * h;
                smp.pos = pos;
                smp.u = u;
                smp.n = gt_normal_flow(u, dir);
                smp.z = edge.depth;
                smp.pol = rng.uniform() < 0.5 ? static_cast<std::int8_t>(-1)
                                              : static_cast<std::int8_t>(1);
                samples.push_back(smp);

                // First-order transport of the point and its edge direction.
                const Eigen::Matrix2d jac = motion_field_jacobian(pos, edge.depth, m);
                pos += h * u;
                dir = (dir + h * (jac * dir)).normalized();
                t += h;
            }
        }
    }

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].t < samples[b].t; });

    SimResult res;
    res.cloud.events.reserve(samples.size());
    res.flow.reserve(samples.size());
    res.normal_flow.reserve(samples.size());
    res.depth.reserve(samples.size());
    for (const std::size_t i : order) {
        const auto& s = samples[i];
        res.cloud.events.push_back(Event{s.t, s.pos.x(), s.pos.y(), s.pol});
        res.flow.push_back(s.u);
        res.normal_flow.push_back(s.n);
        res.depth.push_back(s.z);
    }
    return res;
}

} // namespace evflow
