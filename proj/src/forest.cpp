#include "hrv/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrv/common.hpp"

namespace hrv {

std::vector<double> ForestModel::predict_proba(const Matrix& features) const {
    if (features.cols != feature_names.size()) {
        fail("data", "feature count mismatch: model expects " +
                         std::to_string(feature_names.size()) + ", got " +
                         std::to_string(features.cols));
    }
    std::vector<double> out(features.rows, 0.0);
    for (std::size_t r = 0; r < features.rows; ++r) {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict(features.row(r));
        out[r] = sum / static_cast<double>(trees.size());
    }
    return out;
}

std::vector<double> forest_importances(const std::vector<std::vector<double>>& per_tree_decreases) {
    if (per_tree_decreases.empty()) return {};
    std::vector<double> mean(per_tree_decreases.front().size(), 0.0);
    for (const auto& tree_dec : per_tree_decreases) {
        const double total = std::accumulate(tree_dec.begin(), tree_dec.end(), 0.0);
        if (total <= 0.0) continue;
        for (std::size_t j = 0; j < tree_dec.size(); ++j) mean[j] += tree_dec[j] / total;
    }
    const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
    if (total > 0.0) {
        for (double& v : mean) v /= total;
    }
    return mean;
}

ForestModel train_random_forest(const Dataset& train, RfConfig cfg) {
    if (train.positives() == 0 || train.negatives() == 0) {
        fail("train", "both classes must be present");
    }
    if (cfg.n_trees < 1 || cfg.max_depth < 1) fail("config", "n_trees and max_depth must be >= 1");
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_features();
    if (cfg.features_per_split <= 0) {
        cfg.features_per_split = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
    }

    std::vector<double> targets(n), row_weights(n);
    for (std::size_t r = 0; r < n; ++r) {
        targets[r] = static_cast<double>(train.labels[r]);
        row_weights[r] = cfg.class_weights.of(train.labels[r]);
    }

    TreeGrowConfig grow;
    grow.max_depth = cfg.max_depth;
    grow.min_samples_leaf = cfg.min_samples_leaf;
    grow.features_per_split = cfg.features_per_split;
    grow.rule = SplitRule::weighted_gini;

    ForestModel model;
    model.config = cfg;
    model.feature_names = train.feature_names;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    std::vector<std::vector<double>> decreases(static_cast<std::size_t>(cfg.n_trees));

    parallel_for(static_cast<std::size_t>(cfg.n_trees), cfg.n_threads, [&](std::size_t t) {
        Rng rng = Rng::substream(cfg.seed, t);
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i) sample[i] = rng.uniform_index(n);
        decreases[t].assign(d, 0.0);
        model.trees[t] = fit_tree(train.features, sample, targets, row_weights, grow, rng,
                                  &decreases[t]);
    });

    model.importances = forest_importances(decreases);
    model.per_tree_decreases = std::move(decreases);
    return model;
}

}  // namespace hrv
