#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "beamtwin/experiment.hpp"

using namespace beamtwin;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "beamtwin_test";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config parse/serialize round trip is the identity") {
    json j = {{"scenario", {{"num_antennas", 4}, {"phase_bits", 2}, {"noise_power", 0.05}}},
              {"agent", {{"discount", 0.7}, {"batch_size", 32}, {"buffer_capacity", 256}}},
              {"twin", {{"architecture", "dense"}, {"hidden_width", 24}}},
              {"policy", {{"initial_real_budget", 20}, {"total_real_budget", 200}}},
              {"seeds", {3, 4, 5}},
              {"output_dir", "results"}};
    const ExperimentConfig c1 = parse_config(j);
    const json s1 = config_to_json(c1);
    const ExperimentConfig c2 = parse_config(s1);
    const json s2 = config_to_json(c2);
    CHECK(s1 == s2);
    CHECK(config_hash_hex(c1) == config_hash_hex(c2));
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), InvalidConfigError);
    CHECK_THROWS_AS(parse_config(json{{"scenario", {{"antennas", 4}}}}), InvalidConfigError);
    CHECK_THROWS_AS(parse_config(json{{"agent", {{"lr", 0.1}}}}), InvalidConfigError);
    CHECK_THROWS_AS(parse_config(json{{"twin", {{"architecture", "rbf"}}}}), InvalidConfigError);
    CHECK_THROWS_AS(parse_config(json{{"policy", {{"rounds", 1}}}}), InvalidConfigError);
}

TEST_CASE("twin defaults follow the scenario and architecture") {
    const ExperimentConfig c = parse_config(json::object());
    CHECK(c.scenario.num_antennas == 8);
    CHECK(c.twin.r_interference == 4);  // K + 2 with the default two interferers
    CHECK(c.twin.r_signal == 2);
    CHECK(c.twin.hidden_width == 64);
    CHECK(c.twin.train.learning_rate == doctest::Approx(0.1));
    CHECK(c.twin.train.milestones == std::vector<int>{50, 300, 400});

    const ExperimentConfig d = parse_config(json{{"twin", {{"architecture", "dense"}}}});
    CHECK(d.twin.train.learning_rate == doctest::Approx(0.01));
    CHECK(d.twin.train.milestones == std::vector<int>{100, 300, 400});
}

TEST_CASE("scenario JSON round trip preserves every coefficient bit") {
    ScenarioSpec spec = default_scenario_spec();
    spec.impairment_gain_std = 0.05;
    spec.impairment_phase_std = 0.02;
    const Scenario sc = generate_scenario(spec, 123);
    const json j = scenario_to_json(sc, {"deadbeef", 123});
    const Scenario back = scenario_from_json(j);
    CHECK(back.ue_channel == sc.ue_channel);
    REQUIRE(back.interferer_channels.size() == sc.interferer_channels.size());
    for (size_t k = 0; k < sc.interferer_channels.size(); ++k)
        CHECK(back.interferer_channels[k] == sc.interferer_channels[k]);
    CHECK(back.geometry.impairment.has_value());
    CHECK(*back.geometry.impairment == *sc.geometry.impairment);
    CHECK(back.tx_power == sc.tx_power);
    CHECK(back.noise_power == sc.noise_power);
    CHECK(back.seed == sc.seed);
    REQUIRE(back.ue_paths.size() == sc.ue_paths.size());
    for (size_t k = 0; k < sc.ue_paths.size(); ++k) {
        CHECK(back.ue_paths[k].gain == sc.ue_paths[k].gain);
        CHECK(back.ue_paths[k].azimuth == sc.ue_paths[k].azimuth);
    }
}

TEST_CASE("dataset CSV round trip preserves samples exactly") {
    PowerDataset d;
    d.role = PredictorRole::kInterference;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd phases(3);
        for (int m = 0; m < 3; ++m) phases[m] = u(rng);
        d.append(phases, std::abs(u(rng)));
    }
    const auto path = temp_dir() / "dataset_roundtrip.csv";
    write_dataset_csv(path, d, {"cafe", 1});
    const PowerDataset back = read_dataset_csv(path, PredictorRole::kInterference);
    REQUIRE(back.size() == d.size());
    for (int i = 0; i < d.size(); ++i) {
        CHECK(back.samples[i].phases == d.samples[i].phases);
        CHECK(back.samples[i].power == d.samples[i].power);
    }
}

TEST_CASE("network checkpoint round trip preserves parameters and running stats") {
    DenseNetworkSpec spec;
    spec.layer_sizes = {3, 6, 1};
    spec.output_activation = OutputActivation::kScaledTanhPi;
    NetworkParameters p = init_parameters(spec, 5);
    p.batch_norm[0].running_mean[2] = 0.25;
    const json j = network_to_json(spec, p);
    DenseNetworkSpec spec2;
    const NetworkParameters q = network_from_json(j, spec2);
    CHECK(spec2.layer_sizes == spec.layer_sizes);
    CHECK(spec2.output_activation == spec.output_activation);
    for (size_t l = 0; l < p.weights.size(); ++l) {
        CHECK(q.weights[l] == p.weights[l]);
        CHECK(q.biases[l] == p.biases[l]);
    }
    CHECK(q.batch_norm[0].running_mean == p.batch_norm[0].running_mean);
}

TEST_CASE("aggregate_seeds basics") {
    SUBCASE("single trace aggregates to itself with zero deviation") {
        const AggregateTrace a = aggregate_seeds({{1.0, 2.0, 3.0}});
        CHECK(a.mean == std::vector<double>{1.0, 2.0, 3.0});
        CHECK(a.stddev == std::vector<double>{0.0, 0.0, 0.0});
        CHECK(a.padded == std::vector<int>{0, 0, 0});
    }
    SUBCASE("two constant traces give mean 4 and population std 1") {
        const AggregateTrace a = aggregate_seeds({{3, 3, 3}, {5, 5, 5}});
        for (double m : a.mean) CHECK(m == doctest::Approx(4.0));
        for (double s : a.stddev) CHECK(s == doctest::Approx(1.0));
    }
    SUBCASE("shorter traces are padded with their final value and flagged") {
        const AggregateTrace a = aggregate_seeds({{1, 1, 1, 1}, {3}});
        CHECK(a.mean == std::vector<double>{2.0, 2.0, 2.0, 2.0});
        CHECK(a.padded == std::vector<int>{0, 1, 1, 1});
    }
    SUBCASE("no input is an error") {
        CHECK_THROWS_AS(aggregate_seeds({}), InvalidInputError);
    }
}

TEST_CASE("aggregation matches an independent recomputation to 1e-9") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<std::vector<double>> series(100);
    for (auto& s : series) {
        s.resize(40);
        for (auto& v : s) v = u(rng);
    }
    const AggregateTrace fast = aggregate_seeds(series);
    // independent oracle: accumulate in transposed order with long double
    for (size_t i = 0; i < 40; ++i) {
        long double sum = 0.0L, sumsq = 0.0L;
        for (const auto& s : series) {
            sum += s[i];
            sumsq += static_cast<long double>(s[i]) * s[i];
        }
        const double mean = static_cast<double>(sum / 100.0L);
        const double var = static_cast<double>(sumsq / 100.0L - (sum / 100.0L) * (sum / 100.0L));
        CHECK(std::abs(fast.mean[i] - mean) < 1e-9);
        CHECK(std::abs(fast.stddev[i] - std::sqrt(std::max(0.0, var))) < 1e-9);
    }
}

TEST_CASE("identical config and seed reproduce byte-identical trace files") {
    ScenarioSpec spec = default_scenario_spec();
    spec.num_antennas = 2;
    spec.phase_bits = 1;
    spec.interferers.resize(1);
    const Scenario sc = generate_scenario(spec, 7);
    AgentConfig agent;
    agent.num_antennas = 2;
    agent.phase_bits = 1;
    agent.batch_size = 8;
    agent.buffer_capacity = 32;

    const auto dir = temp_dir();
    const RunResult r1 = run_baseline_real(sc, agent, 30, 7);
    const RunResult r2 = run_baseline_real(sc, agent, 30, 7);
    write_trace_csv(dir / "trace_a.csv", r1.trace, {"hash", 7});
    write_trace_csv(dir / "trace_b.csv", r2.trace, {"hash", 7});
    CHECK(slurp(dir / "trace_a.csv") == slurp(dir / "trace_b.csv"));
    CHECK(slurp(dir / "trace_a.csv").find("# beamtwin_version=") == 0);
}

TEST_CASE("trace sinr column reads back what was written") {
    LearningTrace trace;
    for (int i = 0; i < 5; ++i) {
        TraceRow row;
        row.iteration = i;
        row.sinr = 1.5 * i;
        row.total_power = 2.0;
        row.in_power = 1.0;
        row.cumulative_real = i + 1;
        trace.rows.push_back(row);
    }
    const auto path = temp_dir() / "trace_col.csv";
    write_trace_csv(path, trace, {"hash", 1});
    const std::vector<double> sinr = read_trace_sinr_column(path);
    REQUIRE(sinr.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(sinr[i] == 1.5 * i);
}

TEST_CASE("combiner JSON round trip") {
    Eigen::VectorXd phases(3);
    phases << 0.25, -1.5, 3.0;
    const Combiner c = Combiner::from_phases(phases);
    const Combiner back = combiner_from_json(combiner_to_json(c));
    CHECK(back.phases == c.phases);
}
