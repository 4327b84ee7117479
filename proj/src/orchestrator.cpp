#include "beamtwin/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace beamtwin {

void SwitchPolicy::validate() const {
    if (initial_real_budget < 0 || reacquisition_size < 0 || max_rounds < 0)
        throw InvalidInputError("switch policy: counts must be >= 0");
    if (!(nmse_gate > 0.0)) throw InvalidInputError("switch policy: nmse_gate must be > 0");
    if (plateau_window < 1 || virtual_cap < 1)
        throw InvalidInputError("switch policy: plateau window and cap must be >= 1");
    if (total_real_budget < 1) throw InvalidInputError("switch policy: budget must be >= 1");
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw InvalidInputError("switch policy: validation fraction must be in [0, 1)");
    if (eval_top_k < 1) throw InvalidInputError("switch policy: eval_top_k must be >= 1");
    if (initial_real_budget + static_cast<long>(max_rounds) * reacquisition_size >
        total_real_budget)
        throw InvalidInputError("switch policy: N_init + R * N_re exceeds the total budget");
}

DigitalTwin::DigitalTwin(const TwinConfig& config, int num_antennas) : config_(config) {
    if (config.architecture == TwinArchitecture::kQuadratic) {
        quad_signal_ = std::make_unique<QuadraticPredictor>(num_antennas, config.r_signal,
                                                            PredictorRole::kSignal);
        quad_interference_ = std::make_unique<QuadraticPredictor>(
            num_antennas, config.r_interference, PredictorRole::kInterference);
    } else {
        dense_signal_ = std::make_unique<DensePredictor>(num_antennas, config.hidden_width,
                                                         PredictorRole::kSignal);
        dense_interference_ = std::make_unique<DensePredictor>(
            num_antennas, config.hidden_width, PredictorRole::kInterference);
    }
}

TwinTrainResult DigitalTwin::train_role(PredictorRole role, const PowerDataset& dataset) {
    TwinTrainConfig train = config_.train;
    train.seed = mix_seed(config_.seed, role == PredictorRole::kSignal ? 0x51 : 0x1f);
    if (config_.architecture == TwinArchitecture::kQuadratic)
        return train_twin(role == PredictorRole::kSignal ? *quad_signal_ : *quad_interference_,
                          dataset, train);
    return train_twin(role == PredictorRole::kSignal ? *dense_signal_ : *dense_interference_,
                      dataset, train);
}

const PowerPredictor& DigitalTwin::predictor(PredictorRole role) const {
    if (config_.architecture == TwinArchitecture::kQuadratic)
        return role == PredictorRole::kSignal ? static_cast<const PowerPredictor&>(*quad_signal_)
                                              : *quad_interference_;
    return role == PredictorRole::kSignal ? static_cast<const PowerPredictor&>(*dense_signal_)
                                          : *dense_interference_;
}

bool DigitalTwin::ready() const {
    return predictor(PredictorRole::kSignal).ready() &&
           predictor(PredictorRole::kInterference).ready();
}

TwinEnvironment DigitalTwin::environment() const {
    return TwinEnvironment(&predictor(PredictorRole::kSignal),
                           &predictor(PredictorRole::kInterference));
}

MeasurementReport BudgetedRealChannel::measure(const Combiner& combiner) {
    if (remaining() < 1) throw BudgetError("real-measurement budget exhausted");
    return env_.measure(combiner);
}

namespace {

void push_row(LearningTrace& trace, long iteration, bool virtual_env,
              const MeasurementReport& report, double reward, long cumulative_real) {
    TraceRow row;
    row.iteration = iteration;
    row.virtual_env = virtual_env;
    row.total_power = report.total_power;
    row.in_power = report.in_power;
    row.sinr = sinr_from_report(report);
    row.reward = reward;
    row.cumulative_real = cumulative_real;
    trace.rows.push_back(row);
}

long next_iteration(const LearningTrace& trace) {
    return trace.rows.empty() ? 0 : trace.rows.back().iteration + 1;
}

void acquire(Agent& agent, BudgetedRealChannel& env, int n, PowerDataset& d_in, PowerDataset& d_s,
             LearningTrace& trace) {
    if (!agent.sinr_seeded())
        throw StateError("acquisition: agent SINR memory must be seeded first");
    if (env.remaining() < n) throw BudgetError("acquisition: budget cannot cover the phase");
    for (int i = 0; i < n; ++i) {
        const Agent::StepOutcome out = agent.step(env, /*explore=*/true);
        if (agent.can_update()) agent.update();
        d_in.append(out.transition.next_state, out.report.in_power);
        d_s.append(out.transition.next_state, derive_signal_power(out.report));
        push_row(trace, next_iteration(trace), false, out.report, out.transition.reward,
                 static_cast<long>(env.count()));
    }
}

// Deterministic stride split; validation gets every k-th sample so both early
// (random) and late (policy-shaped) beams are represented.
void split_dataset(const PowerDataset& all, double validation_fraction, PowerDataset& train,
                   PowerDataset& validation) {
    train.role = all.role;
    validation.role = all.role;
    train.samples.clear();
    validation.samples.clear();
    if (validation_fraction <= 0.0 || all.size() < 2) {
        train.samples = all.samples;
        return;
    }
    const int stride = std::max(2, static_cast<int>(std::lround(1.0 / validation_fraction)));
    for (int i = 0; i < all.size(); ++i) {
        if (i % stride == stride - 1)
            validation.samples.push_back(all.samples[i]);
        else
            train.samples.push_back(all.samples[i]);
    }
    if (train.samples.empty()) std::swap(train.samples, validation.samples);
}

struct RoundTrainOutcome {
    double nmse_interference = 0.0;
    double nmse_signal = 0.0;
    bool gate_passed = false;
};

RoundTrainOutcome train_and_gate(DigitalTwin& twin, const PowerDataset& d_in,
                                 const PowerDataset& d_s, const SwitchPolicy& policy) {
    RoundTrainOutcome out;
    PowerDataset train_in, val_in, train_s, val_s;
    split_dataset(d_in, policy.validation_fraction, train_in, val_in);
    split_dataset(d_s, policy.validation_fraction, train_s, val_s);
    twin.train_role(PredictorRole::kInterference, train_in);
    twin.train_role(PredictorRole::kSignal, train_s);
    const PowerDataset& gate_in = val_in.size() > 0 ? val_in : train_in;
    const PowerDataset& gate_s = val_s.size() > 0 ? val_s : train_s;
    try {
        out.nmse_interference = evaluate_nmse(twin.predictor(PredictorRole::kInterference), gate_in);
        out.nmse_signal = evaluate_nmse(twin.predictor(PredictorRole::kSignal), gate_s);
        out.gate_passed = std::max(out.nmse_interference, out.nmse_signal) <= policy.nmse_gate;
    } catch (const DegenerateInputError&) {
        out.nmse_interference = std::numeric_limits<double>::infinity();
        out.nmse_signal = std::numeric_limits<double>::infinity();
        out.gate_passed = false;
    }
    return out;
}

}  // namespace

void initial_acquisition(Agent& agent, BudgetedRealChannel& env, int n, PowerDataset& d_in,
                         PowerDataset& d_s, LearningTrace& trace) {
    if (d_in.size() != 0 || d_s.size() != 0)
        throw InvalidInputError("initial_acquisition: datasets must start empty");
    acquire(agent, env, n, d_in, d_s, trace);
}

void active_reacquisition(Agent& agent, BudgetedRealChannel& env, int n, PowerDataset& d_in,
                          PowerDataset& d_s, LearningTrace& trace) {
    acquire(agent, env, n, d_in, d_s, trace);
}

VirtualPhaseResult virtual_phase(Agent& agent, MeasurementChannel& twin_env, int plateau_window,
                                 int cap, LearningTrace& trace, int track_top_k) {
    if (twin_env.is_real())
        throw InvalidInputError("virtual_phase: environment must be a twin");
    VirtualPhaseResult res;
    res.best_virtual_sinr = -std::numeric_limits<double>::infinity();
    int stale = 0;
    const long cum_real = trace.real_count();

    auto note_beam = [&](double sinr, const Eigen::VectorXd& phases) {
        for (auto& [s, p] : res.top_beams) {
            if (p == phases) {
                s = std::max(s, sinr);
                return;
            }
        }
        res.top_beams.emplace_back(sinr, phases);
        std::sort(res.top_beams.begin(), res.top_beams.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        if (static_cast<int>(res.top_beams.size()) > track_top_k) res.top_beams.pop_back();
    };

    while (res.steps < cap) {
        const Agent::StepOutcome out = agent.step(twin_env, /*explore=*/true);
        if (agent.can_update()) agent.update();
        ++res.steps;
        push_row(trace, next_iteration(trace), true, out.report, out.transition.reward, cum_real);
        note_beam(out.sinr, out.transition.next_state);
        if (out.sinr > res.best_virtual_sinr) {
            res.best_virtual_sinr = out.sinr;
            stale = 0;
        } else if (++stale >= plateau_window) {
            res.plateaued = true;
            break;
        }
    }
    return res;
}

RunResult run_assisted(const Scenario& scenario, const AgentConfig& agent_config,
                       const TwinConfig& twin_config, const SwitchPolicy& policy,
                       std::uint64_t seed) {
    policy.validate();
    RealEnvironment real(scenario);
    BudgetedRealChannel channel(real, policy.total_real_budget);
    Agent agent(agent_config, mix_seed(seed, 0xa6e7));
    TwinConfig twin_cfg = twin_config;
    twin_cfg.seed = mix_seed(seed, 0x716e);
    DigitalTwin twin(twin_cfg, scenario.num_antennas());

    RunResult result;
    LearningTrace& trace = result.trace;
    PowerDataset d_in{PredictorRole::kInterference, {}};
    PowerDataset d_s{PredictorRole::kSignal, {}};

    double best_sinr = -std::numeric_limits<double>::infinity();
    Combiner best = Combiner::from_phases(agent.phases());
    auto consider = [&](const Eigen::VectorXd& phases, const MeasurementReport& report) {
        const double s = sinr_from_report(report);
        if (s > best_sinr) {
            best_sinr = s;
            best = Combiner::from_phases(phases);
        }
    };

    // Seeding measurement, recorded as iteration 0.
    {
        const Eigen::VectorXd p0 = agent.phases();
        const MeasurementReport seed_report = agent.seed_sinr_memory(channel);
        consider(p0, seed_report);
        push_row(trace, 0, false, seed_report, 0.0, static_cast<long>(channel.count()));
    }

    // Measurements behind dataset entries are exact here, so the best-beam
    // tracker can replay them from the datasets.
    auto consider_new_samples = [&](int from) {
        for (int i = from; i < d_in.size(); ++i)
            consider(d_in.samples[i].phases, {d_s.samples[i].power + d_in.samples[i].power,
                                              d_in.samples[i].power});
    };

    initial_acquisition(agent, channel, policy.initial_real_budget, d_in, d_s, trace);
    consider_new_samples(0);

    double prev_round_best = best_sinr;
    for (int round = 1; round <= policy.max_rounds; ++round) {
        if (round > 1) {
            if (channel.remaining() < policy.reacquisition_size) break;
            const int before = d_in.size();
            active_reacquisition(agent, channel, policy.reacquisition_size, d_in, d_s, trace);
            consider_new_samples(before);
        }

        const RoundTrainOutcome tr = train_and_gate(twin, d_in, d_s, policy);
        RoundRecord rec;
        rec.round = round;
        rec.dataset_size = d_in.size();
        rec.nmse_interference = tr.nmse_interference;
        rec.nmse_signal = tr.nmse_signal;
        rec.gate_passed = tr.gate_passed;

        if (tr.gate_passed) {
            TwinEnvironment twin_env = twin.environment();
            const VirtualPhaseResult vp =
                virtual_phase(agent, twin_env, policy.plateau_window, policy.virtual_cap, trace,
                              policy.eval_top_k);

            // Re-evaluate the best distinct virtual beams on the real
            // environment; twin error must not crown a phantom beam.
            for (const auto& [virtual_sinr, phases] : vp.top_beams) {
                if (channel.remaining() < 1) break;
                const MeasurementReport r = channel.measure(Combiner::from_phases(phases));
                push_row(trace, next_iteration(trace), false, r, 0.0,
                         static_cast<long>(channel.count()));
                consider(phases, r);
            }
        }

        rec.best_real_sinr = best_sinr;
        trace.rounds.push_back(rec);
        if (round > 1 && best_sinr <= prev_round_best) break;
        prev_round_best = best_sinr;
    }

    result.best_combiner = best;
    result.best_sinr = best_sinr;
    result.real_measurements = channel.count();
    return result;
}

RunResult run_baseline_real(const Scenario& scenario, const AgentConfig& agent_config,
                            long iteration_budget, std::uint64_t seed) {
    RealEnvironment real(scenario);
    BudgetedRealChannel channel(real, iteration_budget + 1);
    Agent agent(agent_config, mix_seed(seed, 0xa6e7));

    RunResult result;
    LearningTrace& trace = result.trace;
    double best_sinr = -std::numeric_limits<double>::infinity();
    Combiner best = Combiner::from_phases(agent.phases());

    {
        const Eigen::VectorXd p0 = agent.phases();
        const MeasurementReport seed_report = agent.seed_sinr_memory(channel);
        best_sinr = sinr_from_report(seed_report);
        best = Combiner::from_phases(p0);
        push_row(trace, 0, false, seed_report, 0.0, static_cast<long>(channel.count()));
    }
    for (long i = 0; i < iteration_budget; ++i) {
        const Agent::StepOutcome out = agent.step(channel, /*explore=*/true);
        if (agent.can_update()) agent.update();
        push_row(trace, next_iteration(trace), false, out.report, out.transition.reward,
                 static_cast<long>(channel.count()));
        if (out.sinr > best_sinr) {
            best_sinr = out.sinr;
            best = Combiner::from_phases(out.transition.next_state);
        }
    }

    result.best_combiner = best;
    result.best_sinr = best_sinr;
    result.real_measurements = channel.count();
    return result;
}

}  // namespace beamtwin
