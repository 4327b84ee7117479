#include <doctest.h>

#include <random>

#include "beamtwin/array.hpp"

using namespace beamtwin;

namespace {
const std::complex<double> kJ(0.0, 1.0);
}

TEST_CASE("array_response broadside gives zero phase progression") {
    ArrayGeometry g{4, 0.5, std::nullopt};
    const Channel a = array_response(g, 0.0);
    for (int m = 0; m < 4; ++m) CHECK(std::abs(a[m] - 1.0) < 1e-15);
}

TEST_CASE("array_response at 30 degrees steps by pi/2") {
    ArrayGeometry g{4, 0.5, std::nullopt};
    const Channel a = array_response(g, kPi / 6.0);
    const std::complex<double> expected[4] = {1.0, kJ, -1.0, -kJ};
    for (int m = 0; m < 4; ++m) CHECK(std::abs(a[m] - expected[m]) < 1e-12);
}

TEST_CASE("array_response applies per-antenna impairment") {
    Eigen::VectorXcd imp(2);
    imp << 1.0, 0.9 * std::exp(kJ * 0.1);
    ArrayGeometry g{2, 0.5, imp};
    const Channel a = array_response(g, 0.0);
    CHECK(std::abs(a[0] - 1.0) < 1e-15);
    CHECK(std::abs(a[1] - 0.9 * std::exp(kJ * 0.1)) < 1e-15);
}

TEST_CASE("array_response entries are unit modulus without impairment") {
    ArrayGeometry g{16, 0.5, std::nullopt};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> az(-kPi, kPi), el(0.1, kPi - 0.1);
    for (int trial = 0; trial < 50; ++trial) {
        const Channel a = array_response(g, az(rng), el(rng));
        for (int m = 0; m < g.num_antennas; ++m) CHECK(std::abs(std::abs(a[m]) - 1.0) < 1e-14);
    }
}

TEST_CASE("synthesize_channel single path and linearity") {
    ArrayGeometry g{4, 0.5, std::nullopt};
    const Channel one = synthesize_channel(g, {{1.0, 0.0}});
    for (int m = 0; m < 4; ++m) CHECK(std::abs(one[m] - 1.0) < 1e-15);

    const Channel split = synthesize_channel(g, {{0.5, 0.0}, {0.5, 0.0}});
    for (int m = 0; m < 4; ++m) CHECK(std::abs(split[m] - 1.0) < 1e-15);
}

TEST_CASE("synthesize_channel two-path cancellation at the second antenna") {
    ArrayGeometry g{2, 0.5, std::nullopt};
    const Channel h = synthesize_channel(g, {{1.0, 0.0}, {1.0, kPi / 2.0}});
    CHECK(std::abs(h[0] - 2.0) < 1e-12);
    CHECK(std::abs(h[1]) < 1e-12);
}

TEST_CASE("synthesize_channel rejects an empty path list") {
    ArrayGeometry g{4, 0.5, std::nullopt};
    CHECK_THROWS_AS(synthesize_channel(g, {}), InvalidInputError);
}

TEST_CASE("synthesize_channel is linear in path gains") {
    ArrayGeometry g{8, 0.5, std::nullopt};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> az(-kPi / 2, kPi / 2);
    std::normal_distribution<double> gn(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PathComponent> paths(3);
        for (auto& p : paths) {
            p.azimuth = az(rng);
            p.gain = {gn(rng), gn(rng)};
        }
        const std::complex<double> c{gn(rng), gn(rng)};
        std::vector<PathComponent> scaled = paths;
        for (auto& p : scaled) p.gain *= c;
        const Channel base = synthesize_channel(g, paths);
        const Channel got = synthesize_channel(g, scaled);
        CHECK((got - c * base).norm() <= 1e-12 * got.norm());
    }
}

TEST_CASE("generate_scenario with explicit paths ignores the seed") {
    ScenarioSpec spec;
    spec.num_antennas = 4;
    spec.ue.explicit_paths = {{1.0, 0.3}};
    spec.interferers.resize(1);
    spec.interferers[0].explicit_paths = {{0.5, -0.7}};
    const Scenario a = generate_scenario(spec, 1);
    const Scenario b = generate_scenario(spec, 99);
    CHECK(a.ue_channel == b.ue_channel);
    CHECK(a.interferer_channels[0] == b.interferer_channels[0]);
}

TEST_CASE("generate_scenario is a pure function of config and seed") {
    const ScenarioSpec spec = default_scenario_spec();
    const Scenario a = generate_scenario(spec, 42);
    const Scenario b = generate_scenario(spec, 42);
    CHECK(a.ue_channel == b.ue_channel);
    REQUIRE(a.interferer_channels.size() == b.interferer_channels.size());
    for (size_t k = 0; k < a.interferer_channels.size(); ++k)
        CHECK(a.interferer_channels[k] == b.interferer_channels[k]);
}

TEST_CASE("generate_scenario samples different angles for different seeds") {
    const ScenarioSpec spec = default_scenario_spec();
    const Scenario a = generate_scenario(spec, 1);
    const Scenario b = generate_scenario(spec, 2);
    CHECK(a.interferer_paths[0][0].azimuth != b.interferer_paths[0][0].azimuth);
}

TEST_CASE("scenario validation catches dimension mismatches") {
    Scenario s;
    s.geometry = {4, 0.5, std::nullopt};
    s.ue_channel = Eigen::VectorXcd::Ones(3);  // wrong length
    CHECK_THROWS_AS(s.validate(), InvalidInputError);
}
