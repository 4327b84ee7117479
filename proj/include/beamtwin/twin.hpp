#pragma once

// Digital twin: quadratic-form and dense-network power predictors, their
// supervised training on measured power datasets, and accuracy evaluation.

#include <memory>
#include <vector>

#include "beamtwin/beamforming.hpp"
#include "beamtwin/neuralnet.hpp"

namespace beamtwin {

enum class PredictorRole { kSignal, kInterference };

// The dense twin consumes the M real degrees of freedom of a combiner.
inline Eigen::VectorXd encode_input(const Combiner& combiner) { return combiner.phases; }

class PowerPredictor {
public:
    virtual ~PowerPredictor() = default;
    virtual double predict(const Combiner& combiner) const = 0;
    virtual bool ready() const = 0;
    virtual PredictorRole role() const = 0;
};

struct PowerSample {
    Eigen::VectorXd phases;
    double power = 0.0;
};

struct PowerDataset {
    PredictorRole role = PredictorRole::kInterference;
    std::vector<PowerSample> samples;

    int size() const { return static_cast<int>(samples.size()); }
    void append(const Eigen::VectorXd& phases, double power);

    // N x M phase matrix / N target vector views for training.
    Eigen::MatrixXd phase_matrix() const;
    Eigen::VectorXd power_vector() const;
};

// f(w) = ||Q^H w||^2 with Q in C^{M x r_model}; nonnegative by construction.
class QuadraticPredictor final : public PowerPredictor {
public:
    QuadraticPredictor(int num_antennas, int r_model, PredictorRole role);

    double predict(const Combiner& combiner) const override;
    bool ready() const override { return ready_; }
    PredictorRole role() const override { return role_; }

    const Eigen::MatrixXcd& parameter_matrix() const { return q_; }
    void set_parameter_matrix(const Eigen::MatrixXcd& q);
    int num_antennas() const { return static_cast<int>(q_.rows()); }
    int r_model() const { return static_cast<int>(q_.cols()); }

    // Random init with independent zero-mean components, scale
    // 1/sqrt(M * r_model); marks the predictor ready.
    void initialize(std::uint64_t seed);

private:
    Eigen::MatrixXcd q_;
    PredictorRole role_;
    bool ready_ = false;
};

// M -> M' -> M' -> 1 rectifier network with batch norm and a linear output,
// clamped at zero when serving measurements.
class DensePredictor final : public PowerPredictor {
public:
    DensePredictor(int num_antennas, int hidden_width, PredictorRole role);

    double predict(const Combiner& combiner) const override;
    bool ready() const override { return ready_; }
    PredictorRole role() const override { return role_; }

    const DenseNetworkSpec& spec() const { return spec_; }
    NetworkParameters& parameters() { return params_; }
    const NetworkParameters& parameters() const { return params_; }

    void initialize(std::uint64_t seed);
    void mark_ready() { ready_ = true; }

private:
    DenseNetworkSpec spec_;
    mutable NetworkParameters params_;  // eval-mode forward is const
    PredictorRole role_;
    bool ready_ = false;
};

// Gradient of |target - ||Q^H w||^2|^2 with respect to Q in the
// conjugate-coordinate convention: -2 (target - f) w w^H Q. The real partials
// are twice the real/imaginary parts of this matrix.
Eigen::MatrixXcd quadratic_gradient(const Eigen::MatrixXcd& q, const Combiner& combiner,
                                    double target);

struct TwinTrainConfig {
    int batch_size = 512;
    int epochs = 500;
    double learning_rate = 0.1;
    std::vector<int> milestones = {50, 300, 400};
    double decay = 0.1;
    // Targets are scale-normalized during training (quadratic: scale only,
    // to preserve the nonnegative quadratic form; dense: full z-score) and
    // the normalization is folded back into the parameters afterwards.
    bool standardize = true;
    std::uint64_t seed = 0;
};

TwinTrainConfig quadratic_train_defaults();
TwinTrainConfig dense_train_defaults();

struct TwinTrainResult {
    std::vector<double> epoch_loss;  // mean MSE per epoch, de-standardized units
};

// Mini-batch Adam on mean squared error; warm-starts from the predictor's
// current parameters when it is already ready.
TwinTrainResult train_twin(QuadraticPredictor& predictor, const PowerDataset& dataset,
                           const TwinTrainConfig& config);
TwinTrainResult train_twin(DensePredictor& predictor, const PowerDataset& dataset,
                           const TwinTrainConfig& config);

// sum (P - Phat)^2 / sum (P - mean(P))^2 on a held-out set.
double evaluate_nmse(const PowerPredictor& predictor, const PowerDataset& heldout);

// Exact parameter matrices from the hidden scenario: a factor Q with
// Q Q^H = A (interference) or Q Q^H = P_x h h^H (signal), zero-padded to
// r_model = M columns. Test/validation oracles.
Eigen::MatrixXcd exact_interference_factor(const Scenario& scenario);
Eigen::MatrixXcd exact_signal_factor(const Scenario& scenario);

}  // namespace beamtwin
