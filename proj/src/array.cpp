#include "beamtwin/array.hpp"

#include <cmath>
#include <random>

namespace beamtwin {

void ArrayGeometry::validate() const {
    if (num_antennas < 1) throw InvalidInputError("array: num_antennas must be >= 1");
    if (!(element_spacing > 0.0)) throw InvalidInputError("array: element_spacing must be > 0");
    if (impairment && impairment->size() != num_antennas)
        throw InvalidInputError("array: impairment length must equal num_antennas");
}

void Scenario::validate() const {
    geometry.validate();
    if (!(tx_power > 0.0)) throw InvalidInputError("scenario: tx_power must be > 0");
    if (!(noise_power > 0.0)) throw InvalidInputError("scenario: noise_power must be > 0");
    if (phase_bits < 1 || phase_bits > 16)
        throw InvalidInputError("scenario: phase_bits must be in [1, 16]");
    auto check_len = [&](const Channel& h, const char* what) {
        if (h.size() != geometry.num_antennas)
            throw InvalidInputError(std::string("scenario: ") + what + " length mismatch");
        if (!h.allFinite())
            throw InvalidInputError(std::string("scenario: ") + what + " has non-finite entries");
    };
    check_len(ue_channel, "ue_channel");
    for (const auto& h : interferer_channels) check_len(h, "interferer_channel");
}

void ScenarioSpec::validate() const {
    if (num_antennas < 1) throw InvalidConfigError("scenario spec: num_antennas must be >= 1");
    if (!(element_spacing > 0.0))
        throw InvalidConfigError("scenario spec: element_spacing must be > 0");
    if (phase_bits < 1 || phase_bits > 16)
        throw InvalidConfigError("scenario spec: phase_bits must be in [1, 16]");
    if (!(tx_power > 0.0)) throw InvalidConfigError("scenario spec: tx_power must be > 0");
    if (!(noise_power > 0.0)) throw InvalidConfigError("scenario spec: noise_power must be > 0");
    auto check_endpoint = [](const EndpointSpec& e, const char* what) {
        if (e.explicit_paths.empty() && e.num_paths < 1)
            throw InvalidConfigError(std::string("scenario spec: ") + what +
                                     " needs explicit paths or num_paths >= 1");
        if (e.explicit_paths.empty() && !(e.azimuth_low < e.azimuth_high))
            throw InvalidConfigError(std::string("scenario spec: ") + what +
                                     " azimuth range is empty");
    };
    check_endpoint(ue, "ue");
    for (const auto& itf : interferers) check_endpoint(itf, "interferer");
    if (impairment_gain_std < 0.0 || impairment_phase_std < 0.0)
        throw InvalidConfigError("scenario spec: impairment stds must be >= 0");
}

Channel array_response(const ArrayGeometry& geometry, double azimuth, double elevation) {
    geometry.validate();
    const int m_count = geometry.num_antennas;
    Channel a(m_count);
    const double step = 2.0 * kPi * geometry.element_spacing * std::sin(azimuth) * std::sin(elevation);
    for (int m = 0; m < m_count; ++m) {
        a[m] = std::polar(1.0, step * m);
        if (geometry.impairment) a[m] *= (*geometry.impairment)[m];
    }
    return a;
}

Channel synthesize_channel(const ArrayGeometry& geometry,
                           const std::vector<PathComponent>& paths) {
    if (paths.empty()) throw InvalidInputError("synthesize_channel: empty path list");
    geometry.validate();
    Channel h = Channel::Zero(geometry.num_antennas);
    for (const auto& p : paths) {
        if (!std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag()))
            throw InvalidInputError("synthesize_channel: non-finite path gain");
        h += p.gain * array_response(geometry, p.azimuth, p.elevation);
    }
    return h;
}

namespace {

std::vector<PathComponent> realize_paths(const EndpointSpec& e, std::mt19937_64& rng) {
    if (!e.explicit_paths.empty()) return e.explicit_paths;
    std::uniform_real_distribution<double> az(e.azimuth_low, e.azimuth_high);
    std::normal_distribution<double> comp(0.0, e.gain_scale / std::sqrt(2.0));
    std::vector<PathComponent> paths(e.num_paths);
    for (auto& p : paths) {
        p.azimuth = az(rng);
        p.gain = {comp(rng), comp(rng)};
        p.elevation = kPi / 2.0;
    }
    return paths;
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(mix_seed(seed, 0x5ce7a210));

    Scenario sc;
    sc.geometry.num_antennas = spec.num_antennas;
    sc.geometry.element_spacing = spec.element_spacing;
    sc.tx_power = spec.tx_power;
    sc.noise_power = spec.noise_power;
    sc.phase_bits = spec.phase_bits;
    sc.seed = seed;

    // Draw order is fixed: UE paths, interferer paths, hardware impairment.
    sc.ue_paths = realize_paths(spec.ue, rng);
    sc.interferer_paths.reserve(spec.interferers.size());
    for (const auto& itf : spec.interferers) sc.interferer_paths.push_back(realize_paths(itf, rng));

    if (spec.impairment_gain_std > 0.0 || spec.impairment_phase_std > 0.0) {
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXcd imp(spec.num_antennas);
        for (int m = 0; m < spec.num_antennas; ++m) {
            const double mag = 1.0 + spec.impairment_gain_std * g(rng);
            const double ph = spec.impairment_phase_std * g(rng);
            imp[m] = std::polar(mag, ph);
        }
        sc.geometry.impairment = imp;
    }

    sc.ue_channel = synthesize_channel(sc.geometry, sc.ue_paths);
    sc.interferer_channels.reserve(sc.interferer_paths.size());
    for (const auto& paths : sc.interferer_paths)
        sc.interferer_channels.push_back(synthesize_channel(sc.geometry, paths));

    sc.validate();
    return sc;
}

ScenarioSpec default_scenario_spec() {
    ScenarioSpec spec;
    spec.num_antennas = 8;
    spec.element_spacing = 0.5;
    spec.phase_bits = 3;
    spec.tx_power = 1.0;
    spec.noise_power = 0.01;
    spec.ue.num_paths = 3;
    spec.interferers.resize(2);
    for (auto& itf : spec.interferers) itf.num_paths = 1;
    return spec;
}

}  // namespace beamtwin
