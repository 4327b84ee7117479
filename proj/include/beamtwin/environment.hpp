#pragma once

// Measurement-only view of the radio world: one contract implemented by the
// scenario-backed real environment and by the digital twin, with strict
// real-measurement accounting.

#include <memory>
#include <optional>
#include <random>

#include "beamtwin/beamforming.hpp"

namespace beamtwin {

struct MeasurementReport {
    double total_power = 0.0;  // signal + interference + noise, watts
    double in_power = 0.0;     // interference + noise, watts
};

// max(0, total - in): the two observables only determine P_S by subtraction.
inline double derive_signal_power(const MeasurementReport& report) {
    return std::max(0.0, report.total_power - report.in_power);
}

// SINR from the two observables, floored to stay finite when a twin
// predicts zero interference-plus-noise power.
inline double sinr_from_report(const MeasurementReport& report) {
    const double in = std::max(report.in_power, 1e-30);
    return derive_signal_power(report) / in;
}

class MeasurementChannel {
public:
    virtual ~MeasurementChannel() = default;
    virtual MeasurementReport measure(const Combiner& combiner) = 0;
    virtual bool is_real() const = 0;
};

// Multiplicative log-normal estimation error applied independently to each
// observable: x -> x * 10^(n/10), n ~ N(0, sigma_db^2).
struct EstimationNoise {
    double sigma_db = 0.0;
    std::uint64_t seed = 0;
};

class RealEnvironment final : public MeasurementChannel {
public:
    explicit RealEnvironment(Scenario scenario,
                             std::optional<EstimationNoise> noise = std::nullopt);

    MeasurementReport measure(const Combiner& combiner) override;
    bool is_real() const override { return true; }

    std::uint64_t measurement_count() const { return measurement_count_; }
    const Scenario& scenario() const { return scenario_; }

private:
    Scenario scenario_;
    std::optional<EstimationNoise> noise_;
    std::mt19937_64 rng_;
    std::uint64_t measurement_count_ = 0;
};

// One exact real measurement without touching any environment counter; the
// library-level form of the real observation model.
MeasurementReport measure_real(const Scenario& scenario, const Combiner& combiner);

class PowerPredictor;  // see twin.hpp

// Serves measurements from a trained (signal, interference) predictor pair.
// Never counts as a real interaction.
class TwinEnvironment final : public MeasurementChannel {
public:
    TwinEnvironment(const PowerPredictor* signal, const PowerPredictor* interference);

    MeasurementReport measure(const Combiner& combiner) override;
    bool is_real() const override { return false; }

private:
    const PowerPredictor* signal_;
    const PowerPredictor* interference_;
};

}  // namespace beamtwin
