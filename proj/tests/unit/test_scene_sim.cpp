#include <doctest.h>

#include <cmath>

#include "evflow/scene_sim.hpp"

using namespace evflow;

TEST_CASE("motion field hand values") {
    // Pure forward translation: radial field from the focus of expansion.
    const Vec2 u1 = motion_field({0.1, 0.2}, 1.0, RigidMotion{{0, 0, 1}, {0, 0, 0}});
    CHECK(u1.x() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(u1.y() == doctest::Approx(0.2).epsilon(1e-15));

    // Optical-axis rotation has zero flow at the principal point.
    const Vec2 u2 = motion_field({0, 0}, 1.0, RigidMotion{{0, 0, 0}, {0, 0, 1}});
    CHECK(u2.norm() < 1e-15);

    // B_(0,0) first column.
    const Vec2 u3 = motion_field({0, 0}, 1.0, RigidMotion{{0, 0, 0}, {1, 0, 0}});
    CHECK(u3.x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(u3.y() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(motion_field({0, 0}, 0.0, RigidMotion{}), NonPositiveDepth);
    CHECK_THROWS_AS(motion_field({0, 0}, -1.0, RigidMotion{}), NonPositiveDepth);
}

TEST_CASE("ground-truth normal flow projection") {
    const Vec2 n1 = gt_normal_flow({1, 0}, {0, 1});
    CHECK((n1 - Vec2{1, 0}).norm() < 1e-15);

    const Vec2 n2 = gt_normal_flow({1, 0}, {1, 0});
    CHECK(n2.norm() < 1e-15);

    const Vec2 along{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    CHECK(gt_normal_flow({1, 1}, along).norm() < 1e-12);
    const Vec2 across{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    CHECK((gt_normal_flow({1, 1}, across) - Vec2{1, 1}).norm() < 1e-12);

    // n.(u - n) = 0 for arbitrary inputs
    const Vec2 u{0.7, -1.3};
    const Vec2 n = gt_normal_flow(u, {0.6, 0.8});
    CHECK(std::abs(n.dot(u - n)) < 1e-12);
}

namespace {

std::vector<SceneEdge> demo_scene() {
    return {
        SceneEdge{{-0.3, -0.2}, {0.3, -0.2}, 1.0, 400.0},
        SceneEdge{{0.1, -0.1}, {0.1, 0.3}, 2.0, 400.0},
        SceneEdge{{-0.2, 0.0}, {0.2, 0.25}, 1.5, 400.0},
    };
}

} // namespace

TEST_CASE("static scene emits zero flow everywhere") {
    const SimResult res = simulate(demo_scene(), RigidMotion{}, SimWindow{}, 3);
    REQUIRE(res.cloud.size() > 0);
    for (const auto& u : res.flow) CHECK(u.norm() == 0.0);
    CHECK(res.cloud.sorted_by_time());
}

TEST_CASE("translational flow scales as 1/Z") {
    // Constant field for lateral translation: exact 2x ratio between depths.
    const RigidMotion m{{1, 0, 0}, {0, 0, 0}};
    const SimWindow w{};
    const SimResult d1 = simulate({SceneEdge{{-0.2, 0.0}, {0.2, 0.0}, 1.0, 300.0}}, m, w, 5);
    const SimResult d2 = simulate({SceneEdge{{-0.2, 0.0}, {0.2, 0.0}, 2.0, 300.0}}, m, w, 5);
    REQUIRE(d1.cloud.size() == d2.cloud.size());
    for (std::size_t i = 0; i < d1.flow.size(); ++i) {
        CHECK(d1.flow[i].x() == doctest::Approx(2.0 * d2.flow[i].x()).epsilon(1e-12));
        CHECK(d1.flow[i].y() == doctest::Approx(2.0 * d2.flow[i].y()).epsilon(1e-12));
    }
}

TEST_CASE("simulation is bitwise deterministic") {
    const RigidMotion m{{0.3, -0.1, 1.0}, {0.2, 0.0, -0.4}};
    const SimResult a = simulate(demo_scene(), m, SimWindow{}, 11);
    const SimResult b = simulate(demo_scene(), m, SimWindow{}, 11);
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        CHECK(a.cloud.events[i].t == b.cloud.events[i].t);
        CHECK(a.cloud.events[i].x == b.cloud.events[i].x);
        CHECK(a.flow[i] == b.flow[i]);
        CHECK(a.normal_flow[i] == b.normal_flow[i]);
    }
    const SimResult c = simulate(demo_scene(), m, SimWindow{}, 12);
    CHECK(a.cloud.events[0].t != c.cloud.events[0].t);
}

TEST_CASE("emitted ground truth satisfies the normal-flow constraint") {
    const RigidMotion m{{0.5, 0.2, 0.8}, {0.1, -0.2, 0.3}};
    const SimResult res = simulate(demo_scene(), m, SimWindow{}, 17);
    for (std::size_t i = 0; i < res.cloud.size(); ++i) {
        const Vec2& u = res.flow[i];
        const Vec2& n = res.normal_flow[i];
        CHECK(std::abs(n.dot(u - n)) < 1e-12);
        // and the stored flow is the motion field at the event location
        const Vec2 expect = motion_field({res.cloud.events[i].x, res.cloud.events[i].y},
                                         res.depth[i], m);
        CHECK((u - expect).norm() < 1e-9);
    }
}

TEST_CASE("scene rotation about the optical axis rotates flows") {
    const double theta = 0.7;
    const double c = std::cos(theta), s = std::sin(theta);
    const auto rot2 = [&](const Vec2& p) { return Vec2{c * p.x() - s * p.y(), s * p.x() + c * p.y()}; };

    const RigidMotion m{{0.4, -0.3, 0.9}, {0.15, 0.25, -0.2}};
    RigidMotion mr;
    mr.v = Vec3{c * m.v.x() - s * m.v.y(), s * m.v.x() + c * m.v.y(), m.v.z()};
    mr.omega = Vec3{c * m.omega.x() - s * m.omega.y(), s * m.omega.x() + c * m.omega.y(),
                    m.omega.z()};

    std::vector<SceneEdge> edges = demo_scene();
    std::vector<SceneEdge> rotated = edges;
    for (auto& e : rotated) {
        e.p0 = rot2(e.p0);
        e.p1 = rot2(e.p1);
    }

    const SimResult base = simulate(edges, m, SimWindow{}, 23);
    const SimResult rot = simulate(rotated, mr, SimWindow{}, 23);
    REQUIRE(base.cloud.size() == rot.cloud.size());
    for (std::size_t i = 0; i < base.cloud.size(); ++i) {
        CHECK((rot.flow[i] - rot2(base.flow[i])).norm() < 1e-9);
        CHECK((rot.normal_flow[i] - rot2(base.normal_flow[i])).norm() < 1e-9);
        const Vec2 p{base.cloud.events[i].x, base.cloud.events[i].y};
        CHECK((Vec2{rot.cloud.events[i].x, rot.cloud.events[i].y} - rot2(p)).norm() < 1e-9);
    }
}

TEST_CASE("empty scene is rejected") {
    CHECK_THROWS_AS(simulate({}, RigidMotion{}, SimWindow{}, 0), EmptyScene);
}
