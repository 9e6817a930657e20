#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/tree.hpp"

namespace hrv {

struct RfConfig {
    int n_trees = 1000;
    int max_depth = 10;
    int min_samples_leaf = 1;
    int features_per_split = 0;  // 0 = floor(sqrt(n_features))
    ClassWeights class_weights;
    std::uint64_t seed = 0;
    int n_threads = 0;
};

struct ForestModel {
    std::vector<Tree> trees;
    RfConfig config;
    std::vector<double> importances;  // normalized; all zero when no tree split
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> per_tree_decreases;  // raw impurity decreases

    std::vector<double> predict_proba(const Matrix& features) const;
};

/// Bagged class-weighted trees: bootstrap row samples, per-split feature
/// subsampling, prediction = mean of per-tree weighted leaf probabilities.
/// Tree t draws its RNG stream from (seed, t), so training parallelizes
/// without changing results.
ForestModel train_random_forest(const Dataset& train, RfConfig cfg);

/// Mean of per-tree normalized impurity decreases, renormalized to sum to 1.
std::vector<double> forest_importances(const std::vector<std::vector<double>>& per_tree_decreases);

}  // namespace hrv
