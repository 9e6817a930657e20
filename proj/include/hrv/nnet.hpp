#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/matrix.hpp"
#include "hrv/rng.hpp"

namespace hrv {

struct MlpConfig {
    int hidden_layers = 4;
    int units = 64;
    double dropout_rate = 0.4;
    double learning_rate = 0.005;
    int batch_size = 64;
    int epochs = 500;
    ClassWeights class_weights;
    std::uint64_t seed = 0;
    double batchnorm_momentum = 0.99;
    double batchnorm_epsilon = 1e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

/// Dense -> batchnorm -> ReLU -> dropout blocks, then dense(1) -> logistic.
struct MlpModel {
    struct Layer {
        Matrix W;  // fan_in x units
        std::vector<double> b;
        std::vector<double> gamma, beta;          // batchnorm scale/shift
        std::vector<double> run_mean, run_var;    // inference statistics
    };
    std::vector<Layer> layers;
    std::vector<double> out_w;
    double out_b = 0.0;
    std::size_t n_features = 0;
    MlpConfig config;
};

enum class ForwardMode { train, inference };

/// Glorot Normal weights (stddev sqrt(2/(fan_in+fan_out))), zero biases,
/// batchnorm gamma 1 / beta 0, running mean 0 / variance 1.
MlpModel init_mlp(const MlpConfig& cfg, std::size_t n_features);

/// Train mode uses batch statistics and inverted dropout (requires
/// dropout_rng and batch size >= 2; pass nullptr to disable dropout);
/// inference uses running statistics and no dropout. Running statistics are
/// never mutated here. Returns per-row probabilities.
std::vector<double> forward(const MlpModel& model, const Matrix& batch, ForwardMode mode,
                            Rng* dropout_rng = nullptr);

/// Scales kept activations by 1/(1-rate) so the expectation matches the
/// dropout-free pass.
void apply_inverted_dropout(std::span<double> activations, double rate, Rng& rng);

struct LearningCurve {
    struct Epoch {
        double train_loss = 0.0;
        double val_loss = 0.0;
        double train_f1 = 0.0;
        double val_f1 = 0.0;
    };
    std::vector<Epoch> epochs;
};

/// Adam on class-weighted binary cross-entropy. Expects standardized
/// features and both classes in train; val is used for curve reporting only.
std::pair<MlpModel, LearningCurve> train_mlp(const Dataset& train, const Dataset& val,
                                             const MlpConfig& cfg);

/// Compares analytic gradients against central finite differences over every
/// parameter, with dropout off and running statistics untouched. Returns the
/// maximum relative error.
double gradient_check(MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                      double epsilon = 1e-5);

}  // namespace hrv
