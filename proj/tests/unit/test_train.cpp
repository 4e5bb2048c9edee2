#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "evflow/scene_sim.hpp"
#include "evflow/train.hpp"

using namespace evflow;

namespace {

std::vector<std::uint32_t> all_indices(std::size_t n) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    return idx;
}

LabeledCloud sim_dataset(const RigidMotion& m, std::uint64_t seed, double density = 400.0) {
    const std::vector<SceneEdge> edges{
        SceneEdge{{-0.3, -0.1}, {0.3, -0.1}, 1.0, density},
        SceneEdge{{-0.1, -0.25}, {-0.1, 0.25}, 1.5, density},
        SceneEdge{{0.0, 0.0}, {0.25, 0.25}, 2.0, density},
    };
    const SimResult sim = simulate(edges, m, SimWindow{0.0, 0.1, 0.02}, seed);
    return LabeledCloud{sim.cloud, sim.flow};
}

} // namespace

TEST_CASE("augment core: rotation and scaling conventions") {
    EventCloud cloud;
    cloud.events = {Event{0.0, 1.0, 0.0, 1}};
    std::vector<Vec2> flows{{1, 0}};

    // theta = pi/2 under the row-vector convention
    const LabeledCloud rot = augment_with(cloud, flows, M_PI_2, 1.0, all_indices(1));
    CHECK(rot.cloud.events[0].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rot.cloud.events[0].y == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rot.flows[0].x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rot.flows[0].y() == doctest::Approx(-1.0).epsilon(1e-12));

    // scaling: spatial coordinates only
    cloud.events = {Event{0.37, 0.2, -0.4, 1}};
    flows = {{0.5, 0.25}};
    const LabeledCloud scaled = augment_with(cloud, flows, 0.0, 1.25, all_indices(1));
    CHECK(scaled.cloud.events[0].t == 0.37);
    CHECK(scaled.cloud.events[0].x == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(scaled.cloud.events[0].y == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(scaled.flows[0] == Vec2{0.5, 0.25});

    // identity
    const LabeledCloud same = augment_with(cloud, flows, 0.0, 1.0, all_indices(1));
    CHECK(same.cloud.events[0].x == 0.2);
    CHECK(same.cloud.events[0].y == -0.4);
}

TEST_CASE("rotation followed by its inverse restores the input") {
    EventCloud cloud;
    std::vector<Vec2> flows;
    for (int i = 0; i < 50; ++i) {
        cloud.events.push_back(Event{0.001 * i, 0.01 * i - 0.25, 0.3 - 0.01 * i, 1});
        flows.push_back({0.1 * i, -0.05 * i});
    }
    const double theta = 1.234;
    const LabeledCloud fwd = augment_with(cloud, flows, theta, 1.0, all_indices(cloud.size()));
    const LabeledCloud back =
        augment_with(fwd.cloud, fwd.flows, -theta, 1.0, all_indices(cloud.size()));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(std::abs(back.cloud.events[i].x - cloud.events[i].x) < 1e-12);
        CHECK(std::abs(back.cloud.events[i].y - cloud.events[i].y) < 1e-12);
        CHECK((back.flows[i] - flows[i]).norm() < 1e-12);
    }
}

TEST_CASE("sampled augmentation is deterministic and respects ranges") {
    EventCloud cloud;
    std::vector<Vec2> flows;
    for (int i = 0; i < 200; ++i) {
        cloud.events.push_back(Event{0.0001 * i, 0.002 * i, -0.001 * i, 1});
        flows.push_back({1.0, 0.0});
    }
    AugmentationConfig cfg;
    const LabeledCloud a = augment(cloud, flows, cfg, 99);
    const LabeledCloud b = augment(cloud, flows, cfg, 99);
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i)
        CHECK(a.cloud.events[i].x == b.cloud.events[i].x);
    CHECK(a.cloud.size() >= 100);   // sample fraction >= 0.5
    CHECK(a.cloud.size() <= 200);

    // flows keep their norm under rotation-only changes of direction
    for (const auto& u : a.flows) CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));

    AugmentationConfig identity;
    identity.rotation = false;
    identity.scale_min = identity.scale_max = 1.0;
    identity.sample_min = identity.sample_max = 1.0;
    const LabeledCloud c = augment(cloud, flows, identity, 7);
    REQUIRE(c.cloud.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK(c.cloud.events[i].x == cloud.events[i].x);
}

TEST_CASE("training is reproducible given the seed") {
    const LabeledCloud data = sim_dataset(RigidMotion{{0.2, 0.1, 0.9}, {0, 0, 0.2}}, 4);
    TrainConfig cfg;
    cfg.d = 32;
    cfg.hidden = {16};
    cfg.epochs = 1;
    cfg.steps_per_epoch = 5;
    cfg.seed = 77;
    const AugmentationConfig aug;

    const TrainedModel a = train({data}, cfg, aug);
    const TrainedModel b = train({data}, cfg, aug);
    REQUIRE(a.mlp.layers.size() == b.mlp.layers.size());
    for (std::size_t l = 0; l < a.mlp.layers.size(); ++l) {
        CHECK(a.mlp.layers[l].w == b.mlp.layers[l].w);
        CHECK(a.mlp.layers[l].b == b.mlp.layers[l].b);
    }
    CHECK(a.projection_seed == b.projection_seed);
}

TEST_CASE("loss decreases over the first epochs on a single-direction dataset") {
    // One edge orientation, one motion: the easiest possible problem.
    const std::vector<SceneEdge> edges{SceneEdge{{-0.3, 0.0}, {0.3, 0.0}, 1.0, 600.0}};
    const SimResult sim =
        simulate(edges, RigidMotion{{0, 0.8, 0}, {0, 0, 0}}, SimWindow{0.0, 0.1, 0.02}, 9);
    const LabeledCloud data{sim.cloud, sim.flow};

    TrainConfig cfg;
    cfg.d = 48;
    cfg.hidden = {32, 32};
    cfg.epochs = 5;
    cfg.steps_per_epoch = 12;
    cfg.seed = 5;
    AugmentationConfig aug;
    aug.rotation = false;   // keep the task stationary for the smoke test
    aug.scale_min = aug.scale_max = 1.0;
    aug.sample_min = aug.sample_max = 1.0;

    std::ostringstream log;
    train({data}, cfg, aug, &log);

    std::vector<double> losses;
    std::istringstream lines(log.str());
    std::string line;
    while (std::getline(lines, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        losses.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    REQUIRE(losses.size() == 5);
    for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] < losses[i - 1]);
}

TEST_CASE("empty dataset is rejected") {
    CHECK_THROWS_AS(train({}, TrainConfig{}, AugmentationConfig{}), EmptyDataset);
    LabeledCloud empty;
    CHECK_THROWS_AS(train({empty}, TrainConfig{}, AugmentationConfig{}), EmptyDataset);
}
