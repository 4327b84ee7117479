#include "beamtwin/neuralnet.hpp"

#include <cmath>
#include <random>

namespace beamtwin {

void DenseNetworkSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw InvalidInputError("network spec: need at least input and output sizes");
    for (int s : layer_sizes)
        if (s < 1) throw InvalidInputError("network spec: layer sizes must be >= 1");
}

NetworkParameters init_parameters(const DenseNetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(mix_seed(seed, 0x11a9));
    NetworkParameters p;
    const int layers = spec.num_weight_layers();
    p.weights.reserve(layers);
    p.biases.reserve(layers);
    for (int l = 0; l < layers; ++l) {
        const int in = spec.layer_sizes[l];
        const int out = spec.layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(in, out);
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < out; ++j) w(i, j) = u(rng);
        Eigen::VectorXd b(out);
        for (int j = 0; j < out; ++j) b[j] = u(rng);
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    if (spec.hidden_batch_norm) {
        for (int l = 0; l + 1 < layers; ++l) {
            const int d = spec.layer_sizes[l + 1];
            BatchNormParams bn;
            bn.gamma = Eigen::VectorXd::Ones(d);
            bn.beta = Eigen::VectorXd::Zero(d);
            bn.running_mean = Eigen::VectorXd::Zero(d);
            bn.running_var = Eigen::VectorXd::Ones(d);
            p.batch_norm.push_back(std::move(bn));
        }
    }
    return p;
}

NetworkGradients zero_gradients(const DenseNetworkSpec& spec) {
    NetworkGradients g;
    const int layers = spec.num_weight_layers();
    for (int l = 0; l < layers; ++l) {
        g.weights.emplace_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l], spec.layer_sizes[l + 1]));
        g.biases.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
    }
    if (spec.hidden_batch_norm) {
        for (int l = 0; l + 1 < layers; ++l) {
            g.bn_gamma.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
            g.bn_beta.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
        }
    }
    return g;
}

namespace {

void apply_output_activation(OutputActivation act, Eigen::MatrixXd& z) {
    if (act == OutputActivation::kScaledTanhPi)
        z = (kPi * z.array().tanh()).matrix();
}

}  // namespace

ForwardResult forward_cached(const DenseNetworkSpec& spec, NetworkParameters& params,
                             const Eigen::MatrixXd& batch, Mode mode,
                             bool update_running_stats) {
    spec.validate();
    if (batch.cols() != spec.input_size())
        throw InvalidInputError("forward: batch feature count does not match input layer");
    const int layers = spec.num_weight_layers();
    const auto n = static_cast<double>(batch.rows());

    ForwardResult res;
    res.mode = mode;
    res.inputs.resize(layers);
    res.xhat.resize(layers);
    res.inv_std.resize(layers);
    res.hidden.resize(layers);

    Eigen::MatrixXd x = batch;
    for (int l = 0; l < layers; ++l) {
        res.inputs[l] = x;
        Eigen::MatrixXd z = (x * params.weights[l]).rowwise() + params.biases[l].transpose();
        const bool is_hidden = l + 1 < layers;
        if (is_hidden) {
            if (spec.hidden_batch_norm) {
                BatchNormParams& bn = params.batch_norm[l];
                Eigen::VectorXd mean, var;
                if (mode == Mode::kTrain) {
                    mean = z.colwise().mean();
                    var = (z.rowwise() - mean.transpose()).array().square().colwise().sum() / n;
                    if (update_running_stats) {
                        bn.running_mean = kBatchNormMomentum * bn.running_mean +
                                          (1.0 - kBatchNormMomentum) * mean;
                        bn.running_var = kBatchNormMomentum * bn.running_var +
                                         (1.0 - kBatchNormMomentum) * var;
                    }
                } else {
                    mean = bn.running_mean;
                    var = bn.running_var;
                }
                Eigen::VectorXd inv_std =
                    (var.array() + kBatchNormEpsilon).sqrt().inverse().matrix();
                Eigen::MatrixXd xhat =
                    (z.rowwise() - mean.transpose()).array().rowwise() *
                    inv_std.transpose().array();
                z = (xhat.array().rowwise() * bn.gamma.transpose().array()).matrix().rowwise() +
                    bn.beta.transpose();
                res.xhat[l] = std::move(xhat);
                res.inv_std[l] = std::move(inv_std);
            }
            x = z.cwiseMax(0.0);
            res.hidden[l] = x;
        } else {
            apply_output_activation(spec.output_activation, z);
            res.output = std::move(z);
        }
    }
    return res;
}

Eigen::MatrixXd forward(const DenseNetworkSpec& spec, NetworkParameters& params,
                        const Eigen::MatrixXd& batch, Mode mode) {
    return forward_cached(spec, params, batch, mode, mode == Mode::kTrain).output;
}

NetworkGradients backprop(const DenseNetworkSpec& spec, const NetworkParameters& params,
                          const ForwardResult& cache, const Eigen::MatrixXd& output_grad,
                          Eigen::MatrixXd* input_grad) {
    if (cache.mode != Mode::kTrain)
        throw StateError("backprop: gradients require a train-mode forward cache");
    const int layers = spec.num_weight_layers();
    NetworkGradients g = zero_gradients(spec);

    // output head
    Eigen::MatrixXd dz;
    if (spec.output_activation == OutputActivation::kScaledTanhPi) {
        // y = pi * tanh(z)  =>  dy/dz = pi - y^2 / pi
        dz = (output_grad.array() * (kPi - cache.output.array().square() / kPi)).matrix();
    } else {
        dz = output_grad;
    }

    for (int l = layers - 1; l >= 0; --l) {
        g.weights[l].noalias() = cache.inputs[l].transpose() * dz;
        g.biases[l] = dz.colwise().sum();
        Eigen::MatrixXd dx;
        const bool need_dx = l > 0 || input_grad != nullptr;
        if (need_dx) dx.noalias() = dz * params.weights[l].transpose();
        if (l == 0) {
            if (input_grad) *input_grad = std::move(dx);
            break;
        }
        // through the rectifier of the previous hidden layer
        const int h = l - 1;
        Eigen::MatrixXd dy =
            (dx.array() * (cache.hidden[h].array() > 0.0).cast<double>()).matrix();
        if (spec.hidden_batch_norm) {
            const Eigen::MatrixXd& xhat = cache.xhat[h];
            const Eigen::VectorXd& inv_std = cache.inv_std[h];
            const auto n = static_cast<double>(dy.rows());
            g.bn_gamma[h] = (dy.array() * xhat.array()).colwise().sum();
            g.bn_beta[h] = dy.colwise().sum();
            Eigen::MatrixXd dxhat =
                (dy.array().rowwise() * params.batch_norm[h].gamma.transpose().array()).matrix();
            Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
            Eigen::RowVectorXd sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
            dz = (((dxhat * n).rowwise() - sum_dxhat).array() -
                  xhat.array().rowwise() * sum_dxhat_xhat.array())
                     .rowwise() *
                 (inv_std.transpose().array() / n);
        } else {
            dz = std::move(dy);
        }
    }
    return g;
}

double mse_loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw InvalidInputError("mse_loss: shape mismatch");
    const auto n = static_cast<double>(outputs.rows());
    return (outputs - targets).squaredNorm() / n;
}

LossAndGradients backward(const DenseNetworkSpec& spec, NetworkParameters& params,
                          const Eigen::MatrixXd& batch, const Eigen::MatrixXd& targets) {
    if (targets.cols() != spec.output_size() || targets.rows() != batch.rows())
        throw InvalidInputError("backward: target shape mismatch");
    ForwardResult cache = forward_cached(spec, params, batch, Mode::kTrain, true);
    const auto n = static_cast<double>(batch.rows());
    LossAndGradients out;
    out.loss = mse_loss(cache.output, targets);
    const Eigen::MatrixXd dout = 2.0 / n * (cache.output - targets);
    out.gradients = backprop(spec, params, cache, dout);
    return out;
}

double scheduled_lr(double initial, int epoch, const std::vector<int>& milestones,
                    double factor) {
    double lr = initial;
    for (int m : milestones)
        if (m <= epoch) lr *= factor;
    return lr;
}

AdamState::AdamState(AdamConfig config, int num_params)
    : config_(std::move(config)),
      m_(Eigen::VectorXd::Zero(num_params)),
      v_(Eigen::VectorXd::Zero(num_params)) {}

double AdamState::current_lr() const {
    return scheduled_lr(config_.learning_rate, epoch_, config_.milestones, config_.decay);
}

void AdamState::update_range(double* params, const double* grads, int n, int offset, double lr,
                             double bias1, double bias2) {
    if (offset + n > m_.size())
        throw InvalidInputError("adam: more parameters than the state was built for");
    for (int i = 0; i < n; ++i) {
        double& m = m_[offset + i];
        double& v = v_[offset + i];
        m = config_.beta1 * m + (1.0 - config_.beta1) * grads[i];
        v = config_.beta2 * v + (1.0 - config_.beta2) * grads[i] * grads[i];
        params[i] -= lr * (m / bias1) / (std::sqrt(v / bias2) + config_.epsilon);
    }
}

void AdamState::step(double* params, const double* grads, int n) {
    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    update_range(params, grads, n, 0, current_lr(), bc1, bc2);
}

void AdamState::step_blocks(const std::vector<std::pair<double*, int>>& params,
                            const std::vector<std::pair<const double*, int>>& grads) {
    if (params.size() != grads.size())
        throw InvalidInputError("adam: param/grad block count mismatch");
    ++step_;
    const double lr = current_lr();
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    int offset = 0;
    for (size_t b = 0; b < params.size(); ++b) {
        if (params[b].second != grads[b].second)
            throw InvalidInputError("adam: param/grad block size mismatch");
        update_range(params[b].first, grads[b].first, params[b].second, offset, lr, bc1, bc2);
        offset += params[b].second;
    }
}

int trainable_parameter_count(const DenseNetworkSpec& spec) {
    int total = 0;
    const int layers = spec.num_weight_layers();
    for (int l = 0; l < layers; ++l)
        total += spec.layer_sizes[l] * spec.layer_sizes[l + 1] + spec.layer_sizes[l + 1];
    if (spec.hidden_batch_norm)
        for (int l = 0; l + 1 < layers; ++l) total += 2 * spec.layer_sizes[l + 1];
    return total;
}

void adam_step(NetworkParameters& params, const NetworkGradients& grads, AdamState& state) {
    // Single Adam state over the concatenation of all trainable blocks; the
    // per-block offsets must line up between params and grads.
    std::vector<std::pair<double*, int>> pblocks;
    std::vector<std::pair<const double*, int>> gblocks;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        pblocks.emplace_back(params.weights[l].data(), static_cast<int>(params.weights[l].size()));
        pblocks.emplace_back(params.biases[l].data(), static_cast<int>(params.biases[l].size()));
        gblocks.emplace_back(grads.weights[l].data(), static_cast<int>(grads.weights[l].size()));
        gblocks.emplace_back(grads.biases[l].data(), static_cast<int>(grads.biases[l].size()));
    }
    for (size_t l = 0; l < params.batch_norm.size(); ++l) {
        pblocks.emplace_back(params.batch_norm[l].gamma.data(),
                             static_cast<int>(params.batch_norm[l].gamma.size()));
        pblocks.emplace_back(params.batch_norm[l].beta.data(),
                             static_cast<int>(params.batch_norm[l].beta.size()));
        gblocks.emplace_back(grads.bn_gamma[l].data(), static_cast<int>(grads.bn_gamma[l].size()));
        gblocks.emplace_back(grads.bn_beta[l].data(), static_cast<int>(grads.bn_beta[l].size()));
    }
    state.step_blocks(pblocks, gblocks);
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state) {
    if (params.size() != grads.size()) throw InvalidInputError("adam: param/grad size mismatch");
    state.step(params.data(), grads.data(), static_cast<int>(params.size()));
}

void soft_update(NetworkParameters& target, const NetworkParameters& online, double tau) {
    for (size_t l = 0; l < target.weights.size(); ++l) {
        target.weights[l] = tau * online.weights[l] + (1.0 - tau) * target.weights[l];
        target.biases[l] = tau * online.biases[l] + (1.0 - tau) * target.biases[l];
    }
    for (size_t l = 0; l < target.batch_norm.size(); ++l) {
        auto& t = target.batch_norm[l];
        const auto& o = online.batch_norm[l];
        t.gamma = tau * o.gamma + (1.0 - tau) * t.gamma;
        t.beta = tau * o.beta + (1.0 - tau) * t.beta;
        t.running_mean = tau * o.running_mean + (1.0 - tau) * t.running_mean;
        t.running_var = tau * o.running_var + (1.0 - tau) * t.running_var;
    }
}

}  // namespace beamtwin
