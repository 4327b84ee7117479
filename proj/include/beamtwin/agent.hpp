#pragma once

// Actor-critic beam-learning agent: state and action are phase vectors,
// rewards compare consecutive SINRs, transitions are deterministic. DDPG
// machinery (replay buffer, target networks, soft updates, Gaussian
// exploration) realizes the actor-critic training.

#include <deque>
#include <random>

#include "beamtwin/environment.hpp"
#include "beamtwin/neuralnet.hpp"

namespace beamtwin {

struct Transition {
    Eigen::VectorXd state;       // phases before the step
    Eigen::VectorXd action;      // continuous actor output, pre-quantization
    double reward = 0.0;         // +1 or -1
    Eigen::VectorXd next_state;  // quantized action actually executed
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);

    void push(Transition t);
    int size() const { return static_cast<int>(buffer_.size()); }
    int capacity() const { return capacity_; }

    std::vector<const Transition*> sample(int batch, std::mt19937_64& rng) const;

private:
    std::deque<Transition> buffer_;
    int capacity_;
};

struct AgentConfig {
    int num_antennas = 8;
    int phase_bits = 3;
    double discount = 0.5;          // gamma
    double soft_update_rate = 0.005;  // tau
    double noise_scale = 0.3;       // initial exploration std, radians
    double noise_decay = 0.999;     // multiplicative, per step
    int buffer_capacity = 8192;
    int batch_size = 128;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    QuantizeMode quantize_mode = QuantizeMode::kLinear;

    // Actor M -> 16M -> 16M -> M with pi-scaled tanh; critic
    // [state; action] -> 32M -> 16 -> 1 linear. Hidden sizes follow the
    // 16x-input / 16x-output rule.
    DenseNetworkSpec actor_spec() const;
    DenseNetworkSpec critic_spec() const;
    void validate() const;
};

// +1 iff strictly greater, else -1 (equality counts as no improvement).
inline double compute_reward(double sinr_t, double sinr_prev) {
    return sinr_t > sinr_prev ? 1.0 : -1.0;
}

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_objective = 0.0;  // mean critic value of the actor's action
};

class Agent {
public:
    Agent(AgentConfig config, std::uint64_t seed);

    // Continuous action (exploration noise applied and clipped when explore
    // is set) plus the codebook phases that would actually be executed.
    struct ActionPair {
        Eigen::VectorXd continuous;
        Eigen::VectorXd executed;
    };
    ActionPair select_action(const Eigen::VectorXd& state, bool explore);

    struct StepOutcome {
        Transition transition;
        MeasurementReport report;  // measurement at the executed beam
        double sinr = 0.0;
        // set when this call also consumed the SINR-seeding measurement
        std::optional<MeasurementReport> seed_report;
    };

    // Measure the current state once to seed the SINR memory. No-op cost if
    // already seeded (returns the remembered value without measuring).
    MeasurementReport seed_sinr_memory(MeasurementChannel& env);

    // One environment interaction: measure, reward against the previous
    // SINR, store the transition. Seeds the SINR memory with one extra
    // measurement on the first call.
    StepOutcome step(MeasurementChannel& env, bool explore = true);

    // One DDPG update from a uniform replay sample. Throws StateError while
    // the buffer holds fewer than batch_size transitions.
    UpdateStats update();
    bool can_update() const { return buffer_.size() >= config_.batch_size; }

    // Restart interaction from a random codebook state; keeps learned
    // parameters, clears the SINR memory.
    void reset_episode();

    const Eigen::VectorXd& phases() const { return phases_; }
    double last_sinr() const { return last_sinr_; }
    bool sinr_seeded() const { return sinr_seeded_; }
    double exploration_scale() const { return noise_scale_; }
    const ReplayBuffer& replay_buffer() const { return buffer_; }
    const AgentConfig& config() const { return config_; }
    const PhaseCodebook& codebook() const { return codebook_; }

    NetworkParameters& actor_parameters() { return actor_params_; }
    NetworkParameters& critic_parameters() { return critic_params_; }
    const NetworkParameters& actor_target_parameters() const { return actor_target_; }
    const NetworkParameters& critic_target_parameters() const { return critic_target_; }
    const DenseNetworkSpec& actor_network_spec() const { return actor_spec_; }
    const DenseNetworkSpec& critic_network_spec() const { return critic_spec_; }

private:
    AgentConfig config_;
    PhaseCodebook codebook_;
    DenseNetworkSpec actor_spec_;
    DenseNetworkSpec critic_spec_;
    NetworkParameters actor_params_;
    NetworkParameters critic_params_;
    NetworkParameters actor_target_;
    NetworkParameters critic_target_;
    AdamState actor_opt_;
    AdamState critic_opt_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;

    Eigen::VectorXd phases_;
    double last_sinr_ = 0.0;
    bool sinr_seeded_ = false;
    double noise_scale_;
};

}  // namespace beamtwin
