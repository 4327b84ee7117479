#pragma once

// Quantized-phase analog combiners, exact power/SINR/rate oracles, the
// interference Gram matrix, beam gain patterns and a brute-force
// global-optimum search over the phase codebook.

#include <vector>

#include "beamtwin/array.hpp"
#include "beamtwin/common.hpp"

namespace beamtwin {

struct PhaseCodebook {
    int bits = 0;
    std::vector<double> values;  // sorted, uniformly spaced, in (-pi, pi]

    int size() const { return static_cast<int>(values.size()); }
};

// How a continuous phase is snapped onto the codebook. Linear is the paper's
// argmin |phi - theta|; Circular measures distance around the wrap point.
enum class QuantizeMode { kLinear, kCircular };

struct Combiner {
    Eigen::VectorXd phases;    // theta, (-pi, pi]
    Eigen::VectorXcd weights;  // e^{j theta} / sqrt(M), unit norm

    static Combiner from_phases(const Eigen::VectorXd& phases);
    int size() const { return static_cast<int>(phases.size()); }
};

struct PowerReport {
    double signal_power = 0.0;  // P_S, watts
    double in_power = 0.0;      // P_{I+N}, watts
    double sinr = 0.0;          // linear
    double rate = 0.0;          // bits/s/Hz
};

// 2^r phases {-pi + k*2pi/2^r : k = 1..2^r}. r must be in [1, 16].
PhaseCodebook phase_set(int bits);

// Element-wise nearest codebook value under the linear (non-circular)
// absolute distance; ties break toward the smaller codebook value.
Eigen::VectorXd quantize_phases(const Eigen::VectorXd& predicted, const PhaseCodebook& codebook,
                                QuantizeMode mode = QuantizeMode::kLinear);

// Exact expected powers for a combiner against the hidden scenario.
PowerReport compute_powers(const Combiner& combiner, const Scenario& scenario);

// A = P_x * H H^H + sigma^2 I, so that P_{I+N} = w^H A w. Hermitian PD.
Eigen::MatrixXcd gram_matrix(const Scenario& scenario);

// |w^H a(phi, pi/2)|^2 evaluated on a grid of azimuths.
std::vector<double> beam_gain_pattern(const Combiner& combiner, const ArrayGeometry& geometry,
                                      const std::vector<double>& azimuth_grid);

struct ExhaustiveResult {
    Combiner combiner;
    PowerReport report;
    std::uint64_t num_enumerated = 0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1ULL << 24;

// Enumerates all 2^(r*M) codebook phase assignments and returns the
// SINR-maximizing combiner; ties break toward the lexicographically smallest
// phase-index vector. Throws BudgetError above the enumeration cap.
ExhaustiveResult exhaustive_search(const Scenario& scenario,
                                   std::uint64_t enumeration_cap = kDefaultEnumerationCap);

// Matched filter against the UE channel with codebook phases: the best beam
// a design that ignores interference would pick.
Combiner interference_blind_beam(const Scenario& scenario);

}  // namespace beamtwin
