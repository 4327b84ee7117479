#include "beamtwin/twin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace beamtwin {

void PowerDataset::append(const Eigen::VectorXd& phases, double power) {
    if (!phases.allFinite()) throw InvalidInputError("dataset: non-finite phases");
    if (!(power >= 0.0)) throw InvalidInputError("dataset: power must be >= 0");
    samples.push_back({phases, power});
}

Eigen::MatrixXd PowerDataset::phase_matrix() const {
    const int n = size();
    const int m = n > 0 ? static_cast<int>(samples.front().phases.size()) : 0;
    Eigen::MatrixXd x(n, m);
    for (int i = 0; i < n; ++i) x.row(i) = samples[i].phases.transpose();
    return x;
}

Eigen::VectorXd PowerDataset::power_vector() const {
    Eigen::VectorXd p(size());
    for (int i = 0; i < size(); ++i) p[i] = samples[i].power;
    return p;
}

QuadraticPredictor::QuadraticPredictor(int num_antennas, int r_model, PredictorRole role)
    : q_(Eigen::MatrixXcd::Zero(num_antennas, r_model)), role_(role) {
    if (num_antennas < 1 || r_model < 1)
        throw InvalidInputError("quadratic predictor: dimensions must be >= 1");
}

double QuadraticPredictor::predict(const Combiner& combiner) const {
    if (combiner.size() != q_.rows())
        throw InvalidInputError("quadratic predictor: combiner dimension mismatch");
    return (q_.adjoint() * combiner.weights).squaredNorm();
}

void QuadraticPredictor::set_parameter_matrix(const Eigen::MatrixXcd& q) {
    if (q.rows() != q_.rows() || q.cols() != q_.cols())
        throw InvalidInputError("quadratic predictor: parameter matrix shape mismatch");
    q_ = q;
    ready_ = true;
}

void QuadraticPredictor::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x01ad));
    const double scale = 1.0 / std::sqrt(static_cast<double>(q_.rows() * q_.cols()));
    std::normal_distribution<double> g(0.0, scale);
    for (Eigen::Index i = 0; i < q_.rows(); ++i)
        for (Eigen::Index j = 0; j < q_.cols(); ++j) q_(i, j) = {g(rng), g(rng)};
    ready_ = true;
}

DensePredictor::DensePredictor(int num_antennas, int hidden_width, PredictorRole role)
    : role_(role) {
    if (num_antennas < 1 || hidden_width < 1)
        throw InvalidInputError("dense predictor: dimensions must be >= 1");
    spec_.layer_sizes = {num_antennas, hidden_width, hidden_width, 1};
    spec_.hidden_batch_norm = true;
    spec_.output_activation = OutputActivation::kLinear;
    params_ = init_parameters(spec_, 0);
}

void DensePredictor::initialize(std::uint64_t seed) {
    params_ = init_parameters(spec_, seed);
    ready_ = true;
}

double DensePredictor::predict(const Combiner& combiner) const {
    if (combiner.size() != spec_.input_size())
        throw InvalidInputError("dense predictor: combiner dimension mismatch");
    Eigen::MatrixXd batch = encode_input(combiner).transpose();
    const double raw = forward(spec_, params_, batch, Mode::kEval)(0, 0);
    return std::max(0.0, raw);
}

Eigen::MatrixXcd quadratic_gradient(const Eigen::MatrixXcd& q, const Combiner& combiner,
                                    double target) {
    if (combiner.size() != q.rows())
        throw InvalidInputError("quadratic_gradient: combiner dimension mismatch");
    const Eigen::VectorXcd& w = combiner.weights;
    const double f = (q.adjoint() * w).squaredNorm();
    return -2.0 * (target - f) * w * (w.adjoint() * q);
}

TwinTrainConfig quadratic_train_defaults() {
    TwinTrainConfig c;
    c.learning_rate = 0.1;
    c.milestones = {50, 300, 400};
    return c;
}

TwinTrainConfig dense_train_defaults() {
    TwinTrainConfig c;
    c.learning_rate = 0.01;
    c.milestones = {100, 300, 400};
    return c;
}

namespace {

struct TargetNorm {
    double shift = 0.0;
    double scale = 1.0;
};

TargetNorm target_norm(const Eigen::VectorXd& powers, bool center, bool enabled) {
    TargetNorm n;
    if (!enabled || powers.size() == 0) return n;
    const double mean = powers.mean();
    const double var = (powers.array() - mean).square().mean();
    const double rms = std::sqrt(powers.array().square().mean());
    double scale = std::sqrt(var);
    if (!(scale > 1e-12 * std::max(1.0, rms))) scale = rms > 0.0 ? rms : 1.0;
    n.scale = scale;
    n.shift = center ? mean : 0.0;
    return n;
}

std::vector<int> shuffled_indices(int n, std::mt19937_64& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

}  // namespace

TwinTrainResult train_twin(QuadraticPredictor& predictor, const PowerDataset& dataset,
                           const TwinTrainConfig& config) {
    const int n = dataset.size();
    if (n == 0) throw InvalidInputError("train_twin: empty dataset");
    const int m = predictor.num_antennas();
    const int r = predictor.r_model();

    const Eigen::VectorXd targets = dataset.power_vector();
    // Scale-only normalization: centering would require representing an
    // indefinite quadratic form, which ||Q^H w||^2 cannot.
    const TargetNorm norm = target_norm(targets, /*center=*/false, config.standardize);
    const double inv_scale = 1.0 / norm.scale;

    // W has one combiner per column.
    Eigen::MatrixXcd w_all(m, n);
    for (int i = 0; i < n; ++i)
        w_all.col(i) = Combiner::from_phases(dataset.samples[i].phases).weights;
    const Eigen::VectorXd t_norm = targets * inv_scale;

    Eigen::MatrixXcd q = predictor.ready()
                             ? (predictor.parameter_matrix() * std::sqrt(inv_scale)).eval()
                             : Eigen::MatrixXcd();
    if (q.size() == 0) {
        QuadraticPredictor fresh(m, r, predictor.role());
        fresh.initialize(config.seed);
        q = fresh.parameter_matrix();
    }

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    adam_cfg.milestones = config.milestones;
    adam_cfg.decay = config.decay;
    AdamState adam(adam_cfg, 2 * m * r);

    // Flat real parameterization: [Re(Q); Im(Q)], column-major.
    Eigen::VectorXd flat(2 * m * r);
    auto pack = [&](const Eigen::MatrixXcd& src) {
        Eigen::Map<Eigen::MatrixXd>(flat.data(), m, r) = src.real();
        Eigen::Map<Eigen::MatrixXd>(flat.data() + m * r, m, r) = src.imag();
    };
    auto unpack = [&](Eigen::MatrixXcd& dst) {
        dst.real() = Eigen::Map<const Eigen::MatrixXd>(flat.data(), m, r);
        dst.imag() = Eigen::Map<const Eigen::MatrixXd>(flat.data() + m * r, m, r);
    };
    pack(q);

    std::mt19937_64 rng(mix_seed(config.seed, 0x5f01));

    TwinTrainResult result;
    result.epoch_loss.reserve(config.epochs);
    const int batch = std::max(1, std::min(config.batch_size, n));
    Eigen::VectorXd grad(2 * m * r);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        adam.set_epoch(epoch);
        const std::vector<int> order = shuffled_indices(n, rng);
        double epoch_sse = 0.0;
        for (int start = 0; start < n; start += batch) {
            const int b = std::min(batch, n - start);
            unpack(q);
            Eigen::MatrixXcd wb(m, b);
            Eigen::VectorXd tb(b);
            for (int i = 0; i < b; ++i) {
                wb.col(i) = w_all.col(order[start + i]);
                tb[i] = t_norm[order[start + i]];
            }
            const Eigen::MatrixXcd v = q.adjoint() * wb;                    // r x b
            const Eigen::VectorXd f = v.colwise().squaredNorm().transpose();
            const Eigen::VectorXd err = tb - f;
            epoch_sse += err.squaredNorm();
            // mean over the batch of -2 err_n w_n w_n^H Q, real partials 2x
            const Eigen::MatrixXcd g_c =
                (-2.0 / b) * (wb * err.asDiagonal()) * v.adjoint();
            Eigen::Map<Eigen::MatrixXd>(grad.data(), m, r) = 2.0 * g_c.real();
            Eigen::Map<Eigen::MatrixXd>(grad.data() + m * r, m, r) = 2.0 * g_c.imag();
            adam_step(flat, grad, adam);
        }
        result.epoch_loss.push_back(epoch_sse / n * norm.scale * norm.scale);
    }

    unpack(q);
    predictor.set_parameter_matrix(q * std::sqrt(norm.scale));
    return result;
}

TwinTrainResult train_twin(DensePredictor& predictor, const PowerDataset& dataset,
                           const TwinTrainConfig& config) {
    const int n = dataset.size();
    if (n == 0) throw InvalidInputError("train_twin: empty dataset");
    const DenseNetworkSpec& spec = predictor.spec();

    const Eigen::MatrixXd inputs = dataset.phase_matrix();
    const Eigen::VectorXd targets = dataset.power_vector();
    const TargetNorm norm = target_norm(targets, /*center=*/true, config.standardize);
    const Eigen::VectorXd t_norm = (targets.array() - norm.shift) / norm.scale;

    NetworkParameters& params = predictor.parameters();
    if (predictor.ready()) {
        // Un-fold the previous de-normalization so training continues in the
        // new normalized target space.
        params.weights.back() /= norm.scale;
        params.biases.back() =
            (params.biases.back().array() - norm.shift) / norm.scale;
    } else {
        params = init_parameters(spec, config.seed);
    }

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    adam_cfg.milestones = config.milestones;
    adam_cfg.decay = config.decay;
    AdamState adam(adam_cfg, trainable_parameter_count(spec));

    std::mt19937_64 rng(mix_seed(config.seed, 0xd5f1));
    const int batch = std::max(1, std::min(config.batch_size, n));

    TwinTrainResult result;
    result.epoch_loss.reserve(config.epochs);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        adam.set_epoch(epoch);
        const std::vector<int> order = shuffled_indices(n, rng);
        double epoch_sse = 0.0;
        for (int start = 0; start < n; start += batch) {
            const int b = std::min(batch, n - start);
            Eigen::MatrixXd xb(b, inputs.cols());
            Eigen::MatrixXd tb(b, 1);
            for (int i = 0; i < b; ++i) {
                xb.row(i) = inputs.row(order[start + i]);
                tb(i, 0) = t_norm[order[start + i]];
            }
            LossAndGradients lg = backward(spec, params, xb, tb);
            epoch_sse += lg.loss * b;
            adam_step(params, lg.gradients, adam);
        }
        result.epoch_loss.push_back(epoch_sse / n * norm.scale * norm.scale);
    }

    // Fold the de-normalization into the output layer.
    params.weights.back() *= norm.scale;
    params.biases.back() =
        (params.biases.back().array() * norm.scale) + norm.shift;
    predictor.mark_ready();
    return result;
}

double evaluate_nmse(const PowerPredictor& predictor, const PowerDataset& heldout) {
    if (heldout.size() == 0) throw InvalidInputError("evaluate_nmse: empty held-out set");
    const Eigen::VectorXd targets = heldout.power_vector();
    const double mean = targets.mean();
    const double denom = (targets.array() - mean).square().sum();
    if (!(denom > 0.0))
        throw DegenerateInputError("evaluate_nmse: constant held-out targets");
    double num = 0.0;
    for (const auto& s : heldout.samples) {
        const double pred = predictor.predict(Combiner::from_phases(s.phases));
        num += (s.power - pred) * (s.power - pred);
    }
    return num / denom;
}

Eigen::MatrixXcd exact_interference_factor(const Scenario& scenario) {
    const Eigen::MatrixXcd a = gram_matrix(scenario);
    Eigen::LLT<Eigen::MatrixXcd> llt(a);
    if (llt.info() != Eigen::Success)
        throw StateError("exact_interference_factor: gram matrix not positive definite");
    return llt.matrixL();
}

Eigen::MatrixXcd exact_signal_factor(const Scenario& scenario) {
    const int m = scenario.num_antennas();
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(m, m);
    q.col(0) = std::sqrt(scenario.tx_power) * scenario.ue_channel;
    return q;
}

}  // namespace beamtwin
