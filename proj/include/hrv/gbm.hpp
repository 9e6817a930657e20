#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/tree.hpp"

namespace hrv {

struct GbmConfig {
    int n_estimators = 1000;
    double learning_rate = 0.01;
    int max_depth = 4;
    double gamma = 0.9;       // minimum loss reduction required to split
    double reg_lambda = 0.0;  // L2 on leaf values
    ClassWeights class_weights;
    std::uint64_t seed = 0;
    int n_threads = 0;
};

struct GbmModel {
    double base_score = 0.0;  // weighted log-odds of the positive class
    std::vector<Tree> trees;
    GbmConfig config;
    std::vector<double> importances;       // normalized total split gain
    std::vector<double> train_loss;        // weighted BCE after each round
    std::vector<std::string> feature_names;

    std::vector<double> predict_raw(const Matrix& features) const;
    std::vector<double> predict_proba(const Matrix& features) const;
};

double logistic(double x);

/// Stagewise additive logistic boosting with class-weighted binary
/// cross-entropy: per-row gradients/hessians are weight-scaled, leaf values
/// are the second-order Newton step, and splits are kept only when their
/// gain exceeds gamma. Runs all n_estimators rounds (no early stopping)
/// unless the loss reaches exactly zero.
GbmModel train_gbm(const Dataset& train, GbmConfig cfg);

/// Class-weighted binary cross-entropy, mean over rows.
double weighted_bce(std::span<const double> probs, std::span<const int> labels,
                    const ClassWeights& w);

}  // namespace hrv
