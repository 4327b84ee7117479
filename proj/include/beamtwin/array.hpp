#pragma once

// Uniform-linear-array responses, geometric multipath channels and full
// scenario synthesis with reproducible randomness.

#include <optional>
#include <vector>

#include "beamtwin/common.hpp"

namespace beamtwin {

using Channel = Eigen::VectorXcd;  // one complex coefficient per antenna

struct ArrayGeometry {
    int num_antennas = 1;
    double element_spacing = 0.5;  // in wavelengths
    // Static per-antenna complex gain/phase error; empty means ideal hardware.
    std::optional<Eigen::VectorXcd> impairment;

    void validate() const;
};

struct PathComponent {
    std::complex<double> gain;     // path-loss absorbed
    double azimuth = 0.0;          // radians, (-pi, pi]
    double elevation = kPi / 2.0;  // radians, broadside default
};

struct Scenario {
    ArrayGeometry geometry;
    Channel ue_channel;
    std::vector<Channel> interferer_channels;
    double tx_power = 1.0;     // P_x, linear watts
    double noise_power = 0.01; // sigma^2, linear watts
    int phase_bits = 3;
    std::uint64_t seed = 0;

    // Ground-truth paths the channels were synthesized from; kept for
    // pattern/null-depth analysis, never exposed to the learning side.
    std::vector<PathComponent> ue_paths;
    std::vector<std::vector<PathComponent>> interferer_paths;

    int num_antennas() const { return geometry.num_antennas; }
    int num_interferers() const { return static_cast<int>(interferer_channels.size()); }
    void validate() const;
};

// Declarative description of how to build (or sample) one endpoint's paths.
struct EndpointSpec {
    // When non-empty these paths are used verbatim and nothing is sampled.
    std::vector<PathComponent> explicit_paths;

    int num_paths = 1;
    double azimuth_low = -kPi / 2.0;
    double azimuth_high = kPi / 2.0;
    double gain_scale = 1.0;  // complex-normal CN(0, scale^2) per path
};

struct ScenarioSpec {
    int num_antennas = 8;
    double element_spacing = 0.5;
    int phase_bits = 3;
    double tx_power = 1.0;
    double noise_power = 0.01;
    EndpointSpec ue;
    std::vector<EndpointSpec> interferers;
    double impairment_gain_std = 0.0;   // magnitude error std around 1
    double impairment_phase_std = 0.0;  // phase error std, radians

    void validate() const;
};

// Response entry m: impairment_m * exp(j*2*pi*spacing*m*sin(az)*sin(el)).
Channel array_response(const ArrayGeometry& geometry, double azimuth,
                       double elevation = kPi / 2.0);

// Gain-weighted sum of per-path responses. Throws InvalidInputError on an
// empty path list.
Channel synthesize_channel(const ArrayGeometry& geometry,
                           const std::vector<PathComponent>& paths);

// Pure function of (spec, seed): identical inputs give identical scenarios.
Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// Default experiment scenario spec: M=8, r=3, K=2 single-path interferers,
// UE with 3 paths, azimuths uniform over (-pi/2, pi/2), complex-normal gains.
ScenarioSpec default_scenario_spec();

}  // namespace beamtwin
