#include <doctest.h>

#include <cmath>

#include "evflow/metrics.hpp"
#include "evflow/rng.hpp"

using namespace evflow;

TEST_CASE("pee hand values") {
    CHECK(*pee({1, 0}, {1, 0}) == doctest::Approx(0.0));
    CHECK(*pee({1, 0}, {0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*pee({2, 0}, {0.5, 0}) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_FALSE(pee({1, 0}, {0, 0}).has_value());   // masked
}

TEST_CASE("pee is zero exactly on the constraint set") {
    RngStream rng(5);
    for (int i = 0; i < 10000; ++i) {
        const Vec2 u{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 n = 0.5 * u + 0.5 * u.norm() * Vec2{std::cos(phi), std::sin(phi)};
        if (n.norm() <= 1e-8) continue;
        CHECK(*pee(u, n) < 1e-9);
        CHECK(std::abs(n.dot(u - n)) < 1e-9);
    }
}

TEST_CASE("pee invariant under simultaneous rotation") {
    RngStream rng(6);
    for (int i = 0; i < 500; ++i) {
        const Vec2 u{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const Vec2 n{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        if (n.norm() < 1e-6) continue;
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        const double c = std::cos(th), s = std::sin(th);
        const Vec2 ur{c * u.x() - s * u.y(), s * u.x() + c * u.y()};
        const Vec2 nr{c * n.x() - s * n.y(), s * n.x() + c * n.y()};
        CHECK(std::abs(*pee(u, n) - *pee(ur, nr)) < 1e-12);
    }
}

TEST_CASE("pos_pct counting and scale invariance") {
    using Pair = std::pair<Vec2, Vec2>;
    std::vector<Pair> all_pos{{Vec2{1, 0}, Vec2{1, 0}}, {Vec2{0, 2}, Vec2{0, 2}}};
    CHECK(pos_pct(all_pos) == doctest::Approx(100.0));

    std::vector<Pair> all_neg{{Vec2{1, 0}, Vec2{-1, 0}}, {Vec2{0, 2}, Vec2{0, -2}}};
    CHECK(pos_pct(all_neg) == doctest::Approx(0.0));

    std::vector<Pair> mixed{{Vec2{1, 0}, Vec2{1, 0}},
                            {Vec2{1, 0}, Vec2{0.5, 1}},
                            {Vec2{1, 0}, Vec2{-1, 0.2}},
                            {Vec2{0, 1}, Vec2{0, 3}}};
    CHECK(pos_pct(mixed) == doctest::Approx(75.0));

    for (auto& [u, n] : mixed) n *= 17.0;
    CHECK(pos_pct(mixed) == doctest::Approx(75.0));

    CHECK_THROWS_AS(pos_pct({}), EmptyInput);
}

TEST_CASE("rms velocity hand values") {
    const std::vector<Vec3> gt{{1, 0, 0}};
    CHECK(rms_velocity({{1, 0, 0}}, gt) == doctest::Approx(0.0));
    CHECK(rms_velocity({{0, 1, 0}}, gt) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    const std::vector<Vec3> gt2{{1, 0, 0}, {1, 0, 0}};
    const std::vector<Vec3> est2{{1, 0, 0}, {0, 1, 0}};
    CHECK(rms_velocity(est2, gt2) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(rms_velocity({{1, 0, 0}}, gt2), LengthMismatch);
}

TEST_CASE("evaluate_flow masks zero predictions") {
    const std::vector<Vec2> u{{1, 0}, {1, 0}, {2, 0}};
    const std::vector<Vec2> n{{1, 0}, {0, 0}, {0.5, 0}};
    const FlowEvalReport rep = evaluate_flow(u, n);
    CHECK(rep.n_evaluated == 2);
    CHECK(rep.n_masked == 1);
    CHECK(rep.pee_mean == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(rep.pos_pct == doctest::Approx(100.0));
}
