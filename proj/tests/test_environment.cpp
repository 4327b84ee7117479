#include <doctest.h>

#include "beamtwin/environment.hpp"
#include "beamtwin/twin.hpp"

using namespace beamtwin;

namespace {

Scenario matched_scenario() {
    Scenario s;
    s.geometry = {2, 0.5, std::nullopt};
    s.ue_channel = Eigen::VectorXcd(2);
    s.ue_channel << 1.0, 1.0;
    s.tx_power = 1.0;
    s.noise_power = 0.1;
    s.phase_bits = 1;
    return s;
}

Combiner zeros_combiner(int m) { return Combiner::from_phases(Eigen::VectorXd::Zero(m)); }

}  // namespace

TEST_CASE("measure_real sums the exact powers") {
    RealEnvironment env(matched_scenario());
    const MeasurementReport r = env.measure(zeros_combiner(2));
    CHECK(r.total_power == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(r.in_power == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(env.measurement_count() == 1);
}

TEST_CASE("exact measurements are deterministic and agree with compute_powers") {
    const ScenarioSpec spec = default_scenario_spec();
    const Scenario sc = generate_scenario(spec, 3);
    RealEnvironment env(sc);
    const PhaseCodebook cb = phase_set(sc.phase_bits);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> pick(0, cb.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd phases(sc.num_antennas());
        for (int m = 0; m < sc.num_antennas(); ++m) phases[m] = cb.values[pick(rng)];
        const Combiner c = Combiner::from_phases(phases);
        const MeasurementReport a = env.measure(c);
        const MeasurementReport b = env.measure(c);
        CHECK(a.total_power == b.total_power);
        CHECK(a.in_power == b.in_power);
        const PowerReport exact = compute_powers(c, sc);
        CHECK(std::abs(a.in_power - exact.in_power) <= 1e-12 * exact.in_power);
        CHECK(std::abs((a.total_power - a.in_power) - exact.signal_power) <=
              1e-12 * std::max(1.0, exact.signal_power));
    }
    CHECK(env.measurement_count() == 100);
}

TEST_CASE("estimation noise is reproducible for a fixed seed") {
    const Scenario sc = matched_scenario();
    RealEnvironment a(sc, EstimationNoise{1.0, 99});
    RealEnvironment b(sc, EstimationNoise{1.0, 99});
    for (int i = 0; i < 10; ++i) {
        const MeasurementReport ra = a.measure(zeros_combiner(2));
        const MeasurementReport rb = b.measure(zeros_combiner(2));
        CHECK(ra.total_power == rb.total_power);
        CHECK(ra.in_power == rb.in_power);
        CHECK(ra.total_power != doctest::Approx(2.1).epsilon(1e-9));  // actually perturbed
    }
}

TEST_CASE("derive_signal_power subtracts and clamps") {
    CHECK(derive_signal_power({2.1, 0.1}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(derive_signal_power({0.05, 0.1}) == 0.0);
    CHECK(derive_signal_power({0.7, 0.7}) == 0.0);
}

TEST_CASE("signal power recovery through the real channel is exact") {
    const ScenarioSpec spec = default_scenario_spec();
    const Scenario sc = generate_scenario(spec, 8);
    RealEnvironment env(sc);
    const PhaseCodebook cb = phase_set(sc.phase_bits);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(0, cb.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd phases(sc.num_antennas());
        for (int m = 0; m < sc.num_antennas(); ++m) phases[m] = cb.values[pick(rng)];
        const Combiner c = Combiner::from_phases(phases);
        const double ps = derive_signal_power(env.measure(c));
        const double exact = compute_powers(c, sc).signal_power;
        CHECK(std::abs(ps - exact) <= 1e-12 * std::max(1.0, exact));
    }
}

TEST_CASE("twin environment with exactly fitted quadratic predictors matches reality") {
    const ScenarioSpec spec = default_scenario_spec();
    const Scenario sc = generate_scenario(spec, 21);
    const int m = sc.num_antennas();

    QuadraticPredictor sig(m, m, PredictorRole::kSignal);
    sig.set_parameter_matrix(exact_signal_factor(sc));
    QuadraticPredictor inter(m, m, PredictorRole::kInterference);
    inter.set_parameter_matrix(exact_interference_factor(sc));

    TwinEnvironment twin(&sig, &inter);
    RealEnvironment real(sc);
    const PhaseCodebook cb = phase_set(sc.phase_bits);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick(0, cb.size() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd phases(m);
        for (int i = 0; i < m; ++i) phases[i] = cb.values[pick(rng)];
        const Combiner c = Combiner::from_phases(phases);
        const MeasurementReport rt = twin.measure(c);
        const MeasurementReport rr = real.measure(c);
        CHECK(std::abs(rt.total_power - rr.total_power) <= 1e-6 * rr.total_power);
        CHECK(std::abs(rt.in_power - rr.in_power) <= 1e-6 * rr.in_power);
    }
}

TEST_CASE("zero-parameter quadratic twin reports zero power") {
    QuadraticPredictor sig(4, 2, PredictorRole::kSignal);
    sig.set_parameter_matrix(Eigen::MatrixXcd::Zero(4, 2));
    QuadraticPredictor inter(4, 2, PredictorRole::kInterference);
    inter.set_parameter_matrix(Eigen::MatrixXcd::Zero(4, 2));
    TwinEnvironment twin(&sig, &inter);
    const MeasurementReport r = twin.measure(zeros_combiner(4));
    CHECK(r.total_power == 0.0);
    CHECK(r.in_power == 0.0);
}

TEST_CASE("twin measurements never touch the real counter") {
    const Scenario sc = generate_scenario(default_scenario_spec(), 4);
    const int m = sc.num_antennas();
    RealEnvironment real(sc);
    QuadraticPredictor sig(m, m, PredictorRole::kSignal);
    sig.set_parameter_matrix(exact_signal_factor(sc));
    QuadraticPredictor inter(m, m, PredictorRole::kInterference);
    inter.set_parameter_matrix(exact_interference_factor(sc));
    TwinEnvironment twin(&sig, &inter);
    for (int i = 0; i < 10000; ++i) twin.measure(zeros_combiner(m));
    CHECK(real.measurement_count() == 0);
    CHECK_FALSE(twin.is_real());
    CHECK(real.is_real());
}

TEST_CASE("untrained twin refuses to serve measurements") {
    QuadraticPredictor sig(4, 2, PredictorRole::kSignal);
    QuadraticPredictor inter(4, 2, PredictorRole::kInterference);
    TwinEnvironment twin(&sig, &inter);
    CHECK_THROWS_AS(twin.measure(zeros_combiner(4)), StateError);
}
