#include "hrv/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrv/common.hpp"

namespace hrv {

double logistic(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double weighted_bce(std::span<const double> probs, std::span<const int> labels,
                    const ClassWeights& w) {
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
        const double term = labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
        loss += w.of(labels[i]) * term;
    }
    return loss / static_cast<double>(probs.size());
}

std::vector<double> GbmModel::predict_raw(const Matrix& features) const {
    if (features.cols != feature_names.size()) {
        fail("data", "feature count mismatch: model expects " +
                         std::to_string(feature_names.size()) + ", got " +
                         std::to_string(features.cols));
    }
    std::vector<double> raw(features.rows, base_score);
    for (std::size_t r = 0; r < features.rows; ++r) {
        for (const auto& t : trees) raw[r] += config.learning_rate * t.predict(features.row(r));
    }
    return raw;
}

std::vector<double> GbmModel::predict_proba(const Matrix& features) const {
    std::vector<double> out = predict_raw(features);
    for (double& v : out) v = logistic(v);
    return out;
}

GbmModel train_gbm(const Dataset& train, GbmConfig cfg) {
    if (train.positives() == 0 || train.negatives() == 0) {
        fail("train", "both classes must be present");
    }
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_features();

    GbmModel model;
    model.config = cfg;
    model.feature_names = train.feature_names;

    double pos_mass = 0.0, neg_mass = 0.0;
    for (int y : train.labels) {
        if (y == 1) pos_mass += cfg.class_weights.weight_positive;
        else neg_mass += cfg.class_weights.weight_negative;
    }
    model.base_score = std::log(pos_mass / neg_mass);

    TreeGrowConfig grow;
    grow.max_depth = cfg.max_depth;
    grow.features_per_split = 0;  // all features
    grow.gamma = cfg.gamma;
    grow.reg_lambda = cfg.reg_lambda;
    grow.rule = SplitRule::grad_hess;

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

    std::vector<double> raw(n, model.base_score);
    std::vector<double> grad(n), hess(n), probs(n);
    std::vector<double> gain_by_feature(d, 0.0);

    Rng rng(cfg.seed);
    for (int round = 0; round < cfg.n_estimators; ++round) {
        for (std::size_t r = 0; r < n; ++r) {
            const double p = std::clamp(logistic(raw[r]), 1e-15, 1.0 - 1e-15);
            const double w = cfg.class_weights.of(train.labels[r]);
            probs[r] = p;
            grad[r] = w * (p - static_cast<double>(train.labels[r]));
            hess[r] = w * p * (1.0 - p);
        }

        Tree tree = fit_tree(train.features, all_rows, grad, hess, grow, rng, &gain_by_feature);
        for (std::size_t r = 0; r < n; ++r) {
            raw[r] += cfg.learning_rate * tree.predict(train.features.row(r));
        }
        model.trees.push_back(std::move(tree));

        for (std::size_t r = 0; r < n; ++r) probs[r] = logistic(raw[r]);
        const double loss = weighted_bce(probs, train.labels, cfg.class_weights);
        model.train_loss.push_back(loss);
        if (loss == 0.0) break;
    }

    const double total = std::accumulate(gain_by_feature.begin(), gain_by_feature.end(), 0.0);
    model.importances = gain_by_feature;
    if (total > 0.0) {
        for (double& v : model.importances) v /= total;
    }
    return model;
}

}  // namespace hrv
