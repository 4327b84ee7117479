#pragma once

// Digital-twin-assisted learning loop: initial real acquisition, twin
// training, virtual interaction to plateau, demand-based re-acquisition,
// plus the pure-real baseline it is compared against.

#include <memory>

#include "beamtwin/agent.hpp"
#include "beamtwin/twin.hpp"

namespace beamtwin {

struct SwitchPolicy {
    int initial_real_budget = 50;    // N_init
    double nmse_gate = 0.05;         // held-out NMSE required before switching
    int plateau_window = 500;        // W: virtual steps without SINR improvement
    int reacquisition_size = 25;     // N_re
    int max_rounds = 3;              // R
    long total_real_budget = 500;    // B, counts every real measurement
    int virtual_cap = 5000;          // hard per-round cap on virtual steps
    double validation_fraction = 0.2;  // share of samples reserved for the gate
    int eval_top_k = 5;              // virtual beams re-checked on the real env

    void validate() const;
};

enum class TwinArchitecture { kQuadratic, kDense };

struct TwinConfig {
    TwinArchitecture architecture = TwinArchitecture::kQuadratic;
    int r_interference = 4;  // K + 2 for the default scenario
    int r_signal = 2;
    int hidden_width = 64;   // dense twin M'
    TwinTrainConfig train = quadratic_train_defaults();
    std::uint64_t seed = 0;
};

// Both predictor roles behind one object; retraining warm-starts from the
// previous round's parameters.
class DigitalTwin {
public:
    DigitalTwin(const TwinConfig& config, int num_antennas);

    TwinTrainResult train_role(PredictorRole role, const PowerDataset& dataset);
    const PowerPredictor& predictor(PredictorRole role) const;
    bool ready() const;
    TwinEnvironment environment() const;

private:
    TwinConfig config_;
    std::unique_ptr<QuadraticPredictor> quad_signal_, quad_interference_;
    std::unique_ptr<DensePredictor> dense_signal_, dense_interference_;
};

struct TraceRow {
    long iteration = 0;
    bool virtual_env = false;
    double total_power = 0.0;
    double in_power = 0.0;
    double sinr = 0.0;
    double reward = 0.0;  // 0 on seeding and re-evaluation rows
    long cumulative_real = 0;
};

struct RoundRecord {
    int round = 0;
    int dataset_size = 0;
    double nmse_interference = 0.0;
    double nmse_signal = 0.0;
    bool gate_passed = false;
    double best_real_sinr = 0.0;  // best real-evaluated SINR after the round
};

struct LearningTrace {
    std::vector<TraceRow> rows;
    std::vector<RoundRecord> rounds;

    long real_count() const { return rows.empty() ? 0 : rows.back().cumulative_real; }
};

struct RunResult {
    LearningTrace trace;
    Combiner best_combiner;       // best real-evaluated beam
    double best_sinr = 0.0;       // linear
    std::uint64_t real_measurements = 0;
};

// Real channel that throws BudgetError once a measurement budget would be
// exceeded; shared by every orchestration phase of one run.
class BudgetedRealChannel final : public MeasurementChannel {
public:
    BudgetedRealChannel(RealEnvironment& env, long budget) : env_(env), budget_(budget) {}

    MeasurementReport measure(const Combiner& combiner) override;
    bool is_real() const override { return true; }
    long remaining() const { return budget_ - static_cast<long>(env_.measurement_count()); }
    std::uint64_t count() const { return env_.measurement_count(); }

private:
    RealEnvironment& env_;
    long budget_;
};

// N agent steps against the real environment with online learning; every
// measured pair lands in both datasets. Requires the agent's SINR memory to
// be seeded already.
void initial_acquisition(Agent& agent, BudgetedRealChannel& env, int n, PowerDataset& d_in,
                         PowerDataset& d_s, LearningTrace& trace);

// Same stepping with the current (improved) policy; datasets only ever grow.
void active_reacquisition(Agent& agent, BudgetedRealChannel& env, int n, PowerDataset& d_in,
                          PowerDataset& d_s, LearningTrace& trace);

struct VirtualPhaseResult {
    int steps = 0;
    bool plateaued = false;  // false means the cap fired first
    double best_virtual_sinr = 0.0;
    // Distinct executed beams ranked by virtual SINR, best first; candidates
    // for real re-evaluation.
    std::vector<std::pair<double, Eigen::VectorXd>> top_beams;
};

// Steps against the twin until the best-so-far virtual SINR has not improved
// for plateau_window consecutive steps (or cap steps in total). Consumes no
// real measurements.
VirtualPhaseResult virtual_phase(Agent& agent, MeasurementChannel& twin_env, int plateau_window,
                                 int cap, LearningTrace& trace, int track_top_k = 5);

RunResult run_assisted(const Scenario& scenario, const AgentConfig& agent_config,
                       const TwinConfig& twin_config, const SwitchPolicy& policy,
                       std::uint64_t seed);

RunResult run_baseline_real(const Scenario& scenario, const AgentConfig& agent_config,
                            long iteration_budget, std::uint64_t seed);

}  // namespace beamtwin
