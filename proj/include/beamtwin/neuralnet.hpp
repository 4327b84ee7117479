#pragma once

// Minimal dense-network engine: fully-connected layers with optional batch
// normalization and rectifier hidden activations, linear or pi-scaled tanh
// output heads, mean-squared-error backpropagation and Adam with a milestone
// learning-rate schedule. Serves the actor, critic and dense twin.

#include <vector>

#include "beamtwin/common.hpp"

namespace beamtwin {

enum class OutputActivation { kLinear, kScaledTanhPi };
enum class Mode { kTrain, kEval };

struct DenseNetworkSpec {
    std::vector<int> layer_sizes;  // input, hidden..., output
    bool hidden_batch_norm = true;
    OutputActivation output_activation = OutputActivation::kLinear;

    int num_weight_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    void validate() const;
};

struct BatchNormParams {
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct NetworkParameters {
    // weights[l] is (in x out) so a batch X (N x in) maps as X * W + b^T
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    std::vector<BatchNormParams> batch_norm;  // one per hidden layer when enabled
};

struct NetworkGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    std::vector<Eigen::VectorXd> bn_gamma;
    std::vector<Eigen::VectorXd> bn_beta;
};

// Uniform fan-in init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
// biases; batch-norm scale 1, shift 0, running stats (0, 1).
NetworkParameters init_parameters(const DenseNetworkSpec& spec, std::uint64_t seed);

NetworkGradients zero_gradients(const DenseNetworkSpec& spec);

struct ForwardResult {
    Eigen::MatrixXd output;
    Mode mode = Mode::kEval;
    // per weight layer
    std::vector<Eigen::MatrixXd> inputs;    // X_l
    std::vector<Eigen::MatrixXd> xhat;      // batch-norm normalized values
    std::vector<Eigen::VectorXd> inv_std;   // 1/sqrt(var + eps) per feature
    std::vector<Eigen::MatrixXd> hidden;    // rectifier outputs
};

// Train mode normalizes by batch statistics and folds them into the running
// statistics (momentum 0.9); eval mode is a deterministic affine map through
// the running statistics.
Eigen::MatrixXd forward(const DenseNetworkSpec& spec, NetworkParameters& params,
                        const Eigen::MatrixXd& batch, Mode mode);

ForwardResult forward_cached(const DenseNetworkSpec& spec, NetworkParameters& params,
                             const Eigen::MatrixXd& batch, Mode mode,
                             bool update_running_stats);

// Backpropagates an arbitrary dLoss/dOutput through a train-mode cache.
// Optionally reports dLoss/dInput (used to chain the critic into the actor).
NetworkGradients backprop(const DenseNetworkSpec& spec, const NetworkParameters& params,
                          const ForwardResult& cache, const Eigen::MatrixXd& output_grad,
                          Eigen::MatrixXd* input_grad = nullptr);

struct LossAndGradients {
    double loss = 0.0;
    NetworkGradients gradients;
};

// Train-mode forward plus MSE backprop: loss = mean_n ||y_n - t_n||^2.
LossAndGradients backward(const DenseNetworkSpec& spec, NetworkParameters& params,
                          const Eigen::MatrixXd& batch, const Eigen::MatrixXd& targets);

double mse_loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets);

// initial * factor^(number of milestones <= epoch); milestones ascending.
double scheduled_lr(double initial, int epoch, const std::vector<int>& milestones,
                    double factor);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<int> milestones;
    double decay = 0.1;
};

class AdamState {
public:
    AdamState(AdamConfig config, int num_params);

    void set_epoch(int epoch) { epoch_ = epoch; }
    double current_lr() const;
    std::int64_t step_count() const { return step_; }

    // Core bias-corrected update over a flat parameter view.
    void step(double* params, const double* grads, int n);

    // One update over a list of (pointer, length) blocks laid out
    // back-to-back in the moment vectors. Counts as a single step.
    void step_blocks(const std::vector<std::pair<double*, int>>& params,
                     const std::vector<std::pair<const double*, int>>& grads);

private:
    void update_range(double* params, const double* grads, int n, int offset, double lr,
                      double bias1, double bias2);

    AdamConfig config_;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    std::int64_t step_ = 0;
    int epoch_ = 0;
};

int trainable_parameter_count(const DenseNetworkSpec& spec);

void adam_step(NetworkParameters& params, const NetworkGradients& grads, AdamState& state);
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state);

// target <- tau * online + (1 - tau) * target, over trainable parameters and
// batch-norm running statistics alike.
void soft_update(NetworkParameters& target, const NetworkParameters& online, double tau);

}  // namespace beamtwin
