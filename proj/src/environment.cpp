#include "beamtwin/environment.hpp"

#include <cmath>

#include "beamtwin/twin.hpp"

namespace beamtwin {

MeasurementReport measure_real(const Scenario& scenario, const Combiner& combiner) {
    const PowerReport p = compute_powers(combiner, scenario);
    return {p.signal_power + p.in_power, p.in_power};
}

RealEnvironment::RealEnvironment(Scenario scenario, std::optional<EstimationNoise> noise)
    : scenario_(std::move(scenario)), noise_(noise) {
    scenario_.validate();
    if (noise_) {
        if (noise_->sigma_db < 0.0)
            throw InvalidInputError("real environment: noise sigma_db must be >= 0");
        rng_.seed(mix_seed(noise_->seed, 0x0e57));
    }
}

MeasurementReport RealEnvironment::measure(const Combiner& combiner) {
    ++measurement_count_;
    MeasurementReport r = measure_real(scenario_, combiner);
    if (noise_ && noise_->sigma_db > 0.0) {
        std::normal_distribution<double> n_db(0.0, noise_->sigma_db);
        r.total_power *= from_db(n_db(rng_));
        r.in_power *= from_db(n_db(rng_));
    }
    return r;
}

TwinEnvironment::TwinEnvironment(const PowerPredictor* signal, const PowerPredictor* interference)
    : signal_(signal), interference_(interference) {
    if (!signal_ || !interference_)
        throw InvalidInputError("twin environment: null predictor");
}

MeasurementReport TwinEnvironment::measure(const Combiner& combiner) {
    if (!signal_->ready() || !interference_->ready())
        throw StateError("twin environment: predictors are not trained");
    const double ps = std::max(0.0, signal_->predict(combiner));
    const double pin = std::max(0.0, interference_->predict(combiner));
    return {ps + pin, pin};
}

}  // namespace beamtwin
