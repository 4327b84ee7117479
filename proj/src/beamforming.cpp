#include "beamtwin/beamforming.hpp"

#include <cmath>
#include <limits>

namespace beamtwin {

Combiner Combiner::from_phases(const Eigen::VectorXd& phases) {
    Combiner c;
    const int m_count = static_cast<int>(phases.size());
    if (m_count < 1) throw InvalidInputError("combiner: empty phase vector");
    c.phases.resize(m_count);
    c.weights.resize(m_count);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_count));
    for (int m = 0; m < m_count; ++m) {
        if (!std::isfinite(phases[m])) throw InvalidInputError("combiner: non-finite phase");
        c.phases[m] = wrap_phase(phases[m]);
        c.weights[m] = std::polar(scale, c.phases[m]);
    }
    return c;
}

PhaseCodebook phase_set(int bits) {
    if (bits < 1 || bits > 16) throw InvalidInputError("phase_set: bits must be in [1, 16]");
    PhaseCodebook cb;
    cb.bits = bits;
    const int n = 1 << bits;
    cb.values.resize(n);
    for (int k = 1; k <= n; ++k) cb.values[k - 1] = -kPi + k * (2.0 * kPi / n);
    return cb;
}

namespace {

double circular_distance(double a, double b) {
    const double d = std::fabs(wrap_phase(a - b));
    return d;
}

}  // namespace

Eigen::VectorXd quantize_phases(const Eigen::VectorXd& predicted, const PhaseCodebook& codebook,
                                QuantizeMode mode) {
    if (codebook.values.empty()) throw InvalidInputError("quantize_phases: empty codebook");
    Eigen::VectorXd out(predicted.size());
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        double best = codebook.values.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (double v : codebook.values) {
            const double d = mode == QuantizeMode::kLinear ? std::fabs(predicted[i] - v)
                                                           : circular_distance(predicted[i], v);
            // strict < keeps the earlier (smaller) codebook value on ties
            if (d < best_d) {
                best_d = d;
                best = v;
            }
        }
        out[i] = best;
    }
    return out;
}

PowerReport compute_powers(const Combiner& combiner, const Scenario& scenario) {
    if (combiner.size() != scenario.num_antennas())
        throw InvalidInputError("compute_powers: combiner/scenario dimension mismatch");
    PowerReport r;
    r.signal_power = std::norm(combiner.weights.dot(scenario.ue_channel)) * scenario.tx_power;
    r.in_power = scenario.noise_power;
    for (const auto& h : scenario.interferer_channels) {
        if (h.size() != combiner.size())
            throw InvalidInputError("compute_powers: interferer dimension mismatch");
        r.in_power += std::norm(combiner.weights.dot(h)) * scenario.tx_power;
    }
    r.sinr = r.signal_power / r.in_power;
    r.rate = std::log2(1.0 + r.sinr);
    return r;
}

Eigen::MatrixXcd gram_matrix(const Scenario& scenario) {
    const int m_count = scenario.num_antennas();
    Eigen::MatrixXcd a = scenario.noise_power *
                         Eigen::MatrixXcd::Identity(m_count, m_count);
    for (const auto& h : scenario.interferer_channels)
        a += scenario.tx_power * (h * h.adjoint());
    return a;
}

std::vector<double> beam_gain_pattern(const Combiner& combiner, const ArrayGeometry& geometry,
                                      const std::vector<double>& azimuth_grid) {
    if (azimuth_grid.empty()) throw InvalidInputError("beam_gain_pattern: empty azimuth grid");
    if (combiner.size() != geometry.num_antennas)
        throw InvalidInputError("beam_gain_pattern: combiner/geometry dimension mismatch");
    std::vector<double> gains;
    gains.reserve(azimuth_grid.size());
    for (double az : azimuth_grid) {
        const Channel a = array_response(geometry, az);
        gains.push_back(std::norm(combiner.weights.dot(a)));
    }
    return gains;
}

ExhaustiveResult exhaustive_search(const Scenario& scenario, std::uint64_t enumeration_cap) {
    scenario.validate();
    const int m_count = scenario.num_antennas();
    const PhaseCodebook cb = phase_set(scenario.phase_bits);
    const int base = cb.size();

    const int exp_bits = scenario.phase_bits * m_count;
    if (exp_bits > 62 || (1ULL << exp_bits) > enumeration_cap)
        throw BudgetError("exhaustive_search: 2^(r*M) exceeds the enumeration cap");
    const std::uint64_t total = 1ULL << exp_bits;

    // contrib[c][m*base + v] = conj(e^{j theta_v} / sqrt(M)) * h_c[m]
    const int channels = scenario.num_interferers() + 1;
    std::vector<std::vector<std::complex<double>>> contrib(
        channels, std::vector<std::complex<double>>(static_cast<size_t>(m_count) * base));
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_count));
    for (int c = 0; c < channels; ++c) {
        const Channel& h = c == 0 ? scenario.ue_channel : scenario.interferer_channels[c - 1];
        for (int m = 0; m < m_count; ++m)
            for (int v = 0; v < base; ++v)
                contrib[c][static_cast<size_t>(m) * base + v] =
                    std::conj(std::polar(scale, cb.values[v])) * h[m];
    }

    std::vector<int> digits(m_count, 0);
    double best_sinr = -1.0;
    std::vector<int> best_digits;
    PowerReport best_report;

    for (std::uint64_t n = 0; n < total; ++n) {
        double signal = 0.0;
        double inter = 0.0;
        for (int c = 0; c < channels; ++c) {
            std::complex<double> acc = 0.0;
            const auto& tab = contrib[c];
            for (int m = 0; m < m_count; ++m) acc += tab[static_cast<size_t>(m) * base + digits[m]];
            const double p = std::norm(acc) * scenario.tx_power;
            if (c == 0)
                signal = p;
            else
                inter += p;
        }
        const double in_power = inter + scenario.noise_power;
        const double sinr = signal / in_power;
        // strict > keeps the first (lexicographically smallest) index vector
        if (sinr > best_sinr) {
            best_sinr = sinr;
            best_digits = digits;
            best_report.signal_power = signal;
            best_report.in_power = in_power;
            best_report.sinr = sinr;
            best_report.rate = std::log2(1.0 + sinr);
        }
        // mixed-radix increment, last digit fastest: n ascending is
        // lexicographic ascending on (digits[0], ..., digits[M-1])
        for (int m = m_count - 1; m >= 0; --m) {
            if (++digits[m] < base) break;
            digits[m] = 0;
        }
    }

    Eigen::VectorXd phases(m_count);
    for (int m = 0; m < m_count; ++m) phases[m] = cb.values[best_digits[m]];
    ExhaustiveResult res;
    res.combiner = Combiner::from_phases(phases);
    res.report = best_report;
    res.num_enumerated = total;
    return res;
}

Combiner interference_blind_beam(const Scenario& scenario) {
    const int m_count = scenario.num_antennas();
    const PhaseCodebook cb = phase_set(scenario.phase_bits);
    Eigen::VectorXd phases(m_count);
    for (int m = 0; m < m_count; ++m) phases[m] = std::arg(scenario.ue_channel[m]);
    return Combiner::from_phases(quantize_phases(phases, cb));
}

}  // namespace beamtwin
