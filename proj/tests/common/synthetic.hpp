#pragma once

#include <cmath>
#include <vector>

#include "evflow/egomotion.hpp"
#include "evflow/rng.hpp"
#include "evflow/scene_sim.hpp"

namespace evflow::testing {

/// Exact normal-flow observations from randomly placed edge elements under a
/// known rigid motion; the motion-field/projection oracle for the solvers.
inline std::vector<NormalFlowObs> exact_observations(std::size_t count, const RigidMotion& m,
                                                     std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<NormalFlowObs> obs;
    obs.reserve(count);
    while (obs.size() < count) {
        const Vec2 x{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const double z = rng.uniform(0.5, 3.0);
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 edge_dir{std::cos(phi), std::sin(phi)};
        const Vec2 u = motion_field(x, z, m);
        const Vec2 n = gt_normal_flow(u, edge_dir);
        const double mag = n.norm();
        if (mag < 1e-6) continue;
        obs.push_back(NormalFlowObs{x, n / mag, mag});
    }
    return obs;
}

/// Flip the direction of a deterministic fraction of observations.
inline void flip_directions(std::vector<NormalFlowObs>& obs, double fraction,
                            std::uint64_t seed) {
    RngStream rng(seed);
    for (auto& o : obs)
        if (rng.uniform() < fraction) o.g = -o.g;
}

inline double angle_deg(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

} // namespace evflow::testing
