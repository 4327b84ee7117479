#include "beamtwin/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace beamtwin {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw InvalidInputError("replay buffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
    if (t.reward != 1.0 && t.reward != -1.0)
        throw InvalidInputError("replay buffer: reward must be +1 or -1");
    if (static_cast<int>(buffer_.size()) == capacity_) buffer_.pop_front();
    buffer_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(int batch, std::mt19937_64& rng) const {
    if (batch > size()) throw StateError("replay buffer: fewer transitions than batch size");
    // without replacement; batch == size yields the whole buffer
    std::vector<int> idx(size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> chosen;
    chosen.reserve(batch);
    std::sample(idx.begin(), idx.end(), std::back_inserter(chosen), batch, rng);
    std::vector<const Transition*> out(batch);
    for (int i = 0; i < batch; ++i) out[i] = &buffer_[chosen[i]];
    return out;
}

DenseNetworkSpec AgentConfig::actor_spec() const {
    DenseNetworkSpec s;
    s.layer_sizes = {num_antennas, 16 * num_antennas, 16 * num_antennas, num_antennas};
    s.hidden_batch_norm = true;
    s.output_activation = OutputActivation::kScaledTanhPi;
    return s;
}

DenseNetworkSpec AgentConfig::critic_spec() const {
    DenseNetworkSpec s;
    s.layer_sizes = {2 * num_antennas, 32 * num_antennas, 16, 1};
    s.hidden_batch_norm = true;
    s.output_activation = OutputActivation::kLinear;
    return s;
}

void AgentConfig::validate() const {
    if (num_antennas < 1) throw InvalidInputError("agent config: num_antennas must be >= 1");
    if (phase_bits < 1 || phase_bits > 16)
        throw InvalidInputError("agent config: phase_bits must be in [1, 16]");
    if (discount < 0.0 || discount > 1.0)
        throw InvalidInputError("agent config: discount must be in [0, 1]");
    if (!(soft_update_rate > 0.0) || soft_update_rate > 1.0)
        throw InvalidInputError("agent config: soft_update_rate must be in (0, 1]");
    if (noise_scale < 0.0 || noise_decay <= 0.0 || noise_decay > 1.0)
        throw InvalidInputError("agent config: bad exploration noise settings");
    if (batch_size < 1 || buffer_capacity < batch_size)
        throw InvalidInputError("agent config: buffer must hold at least one batch");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
        throw InvalidInputError("agent config: learning rates must be > 0");
}

Agent::Agent(AgentConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      codebook_(phase_set(config_.phase_bits)),
      actor_spec_(config_.actor_spec()),
      critic_spec_(config_.critic_spec()),
      actor_params_(init_parameters(actor_spec_, mix_seed(seed, 1))),
      critic_params_(init_parameters(critic_spec_, mix_seed(seed, 2))),
      actor_target_(actor_params_),
      critic_target_(critic_params_),
      actor_opt_(AdamConfig{config_.actor_lr, 0.9, 0.999, 1e-8, {}, 0.1},
                 trainable_parameter_count(actor_spec_)),
      critic_opt_(AdamConfig{config_.critic_lr, 0.9, 0.999, 1e-8, {}, 0.1},
                  trainable_parameter_count(critic_spec_)),
      buffer_(config_.buffer_capacity),
      rng_(mix_seed(seed, 3)),
      noise_scale_(config_.noise_scale) {
    config_.validate();
    reset_episode();
}

void Agent::reset_episode() {
    std::uniform_int_distribution<int> pick(0, codebook_.size() - 1);
    phases_.resize(config_.num_antennas);
    for (int m = 0; m < config_.num_antennas; ++m) phases_[m] = codebook_.values[pick(rng_)];
    last_sinr_ = 0.0;
    sinr_seeded_ = false;
}

Agent::ActionPair Agent::select_action(const Eigen::VectorXd& state, bool explore) {
    Eigen::MatrixXd row = state.transpose();
    Eigen::MatrixXd out = forward(actor_spec_, actor_params_, row, Mode::kEval);
    Eigen::VectorXd a = out.row(0).transpose();
    if (explore && noise_scale_ > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_scale_);
        for (int m = 0; m < a.size(); ++m) a[m] += noise(rng_);
    }
    const double hi = std::nextafter(kPi, 0.0);
    for (int m = 0; m < a.size(); ++m) a[m] = std::clamp(a[m], -hi, hi);
    ActionPair ap;
    ap.continuous = a;
    ap.executed = quantize_phases(a, codebook_, config_.quantize_mode);
    return ap;
}

MeasurementReport Agent::seed_sinr_memory(MeasurementChannel& env) {
    if (sinr_seeded_)
        throw StateError("agent: SINR memory is already seeded");
    const MeasurementReport report = env.measure(Combiner::from_phases(phases_));
    last_sinr_ = sinr_from_report(report);
    sinr_seeded_ = true;
    return report;
}

Agent::StepOutcome Agent::step(MeasurementChannel& env, bool explore) {
    StepOutcome out;
    if (!sinr_seeded_) out.seed_report = seed_sinr_memory(env);
    ActionPair ap = select_action(phases_, explore);
    out.report = env.measure(Combiner::from_phases(ap.executed));
    out.sinr = sinr_from_report(out.report);

    Transition t;
    t.state = phases_;
    t.action = ap.continuous;
    t.reward = compute_reward(out.sinr, last_sinr_);
    t.next_state = ap.executed;
    buffer_.push(t);
    out.transition = t;

    phases_ = ap.executed;
    last_sinr_ = out.sinr;
    noise_scale_ *= config_.noise_decay;
    return out;
}

UpdateStats Agent::update() {
    const int b = config_.batch_size;
    if (buffer_.size() < b) throw StateError("agent update: replay buffer underfilled");
    const int m = config_.num_antennas;
    const auto batch = buffer_.sample(b, rng_);

    Eigen::MatrixXd states(b, m), actions(b, m), next_states(b, m);
    Eigen::MatrixXd rewards(b, 1);
    for (int i = 0; i < b; ++i) {
        states.row(i) = batch[i]->state.transpose();
        actions.row(i) = batch[i]->action.transpose();
        next_states.row(i) = batch[i]->next_state.transpose();
        rewards(i, 0) = batch[i]->reward;
    }

    // Target networks run on batch statistics without mutating their own
    // running statistics.
    const Eigen::MatrixXd next_actions =
        forward_cached(actor_spec_, actor_target_, next_states, Mode::kTrain, false).output;
    Eigen::MatrixXd next_inputs(b, 2 * m);
    next_inputs << next_states, next_actions;
    const Eigen::MatrixXd q_next =
        forward_cached(critic_spec_, critic_target_, next_inputs, Mode::kTrain, false).output;
    const Eigen::MatrixXd targets = rewards + config_.discount * q_next;

    // Critic regression toward r + gamma * Q'(s', mu'(s')).
    Eigen::MatrixXd critic_inputs(b, 2 * m);
    critic_inputs << states, actions;
    UpdateStats stats;
    {
        ForwardResult cache =
            forward_cached(critic_spec_, critic_params_, critic_inputs, Mode::kTrain, true);
        stats.critic_loss = mse_loss(cache.output, targets);
        const Eigen::MatrixXd dout = 2.0 / b * (cache.output - targets);
        NetworkGradients grads = backprop(critic_spec_, critic_params_, cache, dout);
        adam_step(critic_params_, grads, critic_opt_);
    }

    // Actor ascends the critic's value of its own (continuous) action; the
    // quantizer stays outside every gradient path.
    {
        ForwardResult acache =
            forward_cached(actor_spec_, actor_params_, states, Mode::kTrain, true);
        Eigen::MatrixXd inputs(b, 2 * m);
        inputs << states, acache.output;
        ForwardResult ccache =
            forward_cached(critic_spec_, critic_params_, inputs, Mode::kTrain, false);
        stats.actor_objective = ccache.output.mean();
        const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(b, 1, -1.0 / b);
        Eigen::MatrixXd dinput;
        backprop(critic_spec_, critic_params_, ccache, dq, &dinput);
        const Eigen::MatrixXd daction = dinput.rightCols(m);
        NetworkGradients grads = backprop(actor_spec_, actor_params_, acache, daction);
        adam_step(actor_params_, grads, actor_opt_);
    }

    soft_update(actor_target_, actor_params_, config_.soft_update_rate);
    soft_update(critic_target_, critic_params_, config_.soft_update_rate);
    return stats;
}

}  // namespace beamtwin
