#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hrv/matrix.hpp"
#include "hrv/rng.hpp"

namespace hrv {

/// Flat node; feature < 0 marks a leaf. Internal nodes route x left iff
/// x[feature] <= threshold.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // class-weighted probability (gini) or additive score (grad_hess)

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    std::size_t n_splits() const {
        std::size_t c = 0;
        for (const auto& n : nodes) c += n.is_leaf() ? 0 : 1;
        return c;
    }
};

enum class SplitRule {
    weighted_gini,  // targets = labels in {0,1}, weights = row weights
    grad_hess,      // targets = gradients, weights = hessians
};

struct TreeGrowConfig {
    int max_depth = 10;
    int min_samples_leaf = 1;
    int features_per_split = 0;  // 0 = all features
    double gamma = 0.0;          // grad_hess: minimum gain required to split
    double reg_lambda = 0.0;     // grad_hess: L2 on leaf values
    SplitRule rule = SplitRule::weighted_gini;
};

/// Greedy best-split tree over midpoint thresholds between consecutive
/// distinct sorted values. Ties break toward the lowest feature index, then
/// the lowest threshold. Gini mode splits any impure node with a valid
/// candidate (zero-gain splits allowed); grad_hess mode requires
/// gain > gamma. When importance_accum is given, each split adds its
/// impurity decrease (or gain) to the split feature's slot.
Tree fit_tree(const Matrix& X, const std::vector<std::size_t>& rows,
              std::span<const double> targets, std::span<const double> weights,
              const TreeGrowConfig& cfg, Rng& rng,
              std::vector<double>* importance_accum = nullptr);

}  // namespace hrv
