#include "hrv/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrv/common.hpp"

namespace hrv {

namespace {

struct NodeStats {
    // gini: s0 = weight mass of class 0, s1 = mass of class 1
    // grad_hess: s0 = sum of gradients, s1 = sum of hessians
    double s0 = 0.0;
    double s1 = 0.0;

    void add(double target, double weight, SplitRule rule) {
        if (rule == SplitRule::weighted_gini) {
            if (target > 0.5) s1 += weight;
            else s0 += weight;
        } else {
            s0 += target;
            s1 += weight;
        }
    }
    void remove(double target, double weight, SplitRule rule) {
        if (rule == SplitRule::weighted_gini) {
            if (target > 0.5) s1 -= weight;
            else s0 -= weight;
        } else {
            s0 -= target;
            s1 -= weight;
        }
    }
};

// Weighted Gini impurity mass: W * (1 - p0^2 - p1^2)
double gini_mass(const NodeStats& s) {
    const double w = s.s0 + s.s1;
    if (w <= 0.0) return 0.0;
    return w - (s.s0 * s.s0 + s.s1 * s.s1) / w;
}

// XGBoost-style score contribution: G^2 / (H + lambda)
double grad_score(const NodeStats& s, double lambda) {
    const double denom = s.s1 + lambda;
    if (denom < 1e-12) return 0.0;
    return s.s0 * s.s0 / denom;
}

double leaf_value(const NodeStats& s, const TreeGrowConfig& cfg) {
    if (cfg.rule == SplitRule::weighted_gini) {
        const double w = s.s0 + s.s1;
        return w > 0.0 ? s.s1 / w : 0.0;
    }
    const double denom = s.s1 + cfg.reg_lambda;
    return denom < 1e-12 ? 0.0 : -s.s0 / denom;
}

struct BestSplit {
    int feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    std::size_t left_count = 0;
};

struct Grower {
    const Matrix& X;
    std::span<const double> targets;
    std::span<const double> weights;
    const TreeGrowConfig& cfg;
    Rng& rng;
    std::vector<double>* importance;
    std::vector<TreeNode> nodes;
    std::vector<std::pair<double, std::size_t>> scratch;  // (value, row) per node-feature

    int grow(std::vector<std::size_t>& rows, int depth) {
        NodeStats total;
        for (std::size_t r : rows) total.add(targets[r], weights[r], cfg.rule);

        const int node_index = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes.back().value = leaf_value(total, cfg);

        if (depth >= cfg.max_depth || rows.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf)) {
            return node_index;
        }
        if (cfg.rule == SplitRule::weighted_gini && (total.s0 <= 0.0 || total.s1 <= 0.0)) {
            return node_index;  // pure node
        }

        std::vector<std::size_t> candidates;
        const std::size_t n_feat = X.cols;
        if (cfg.features_per_split > 0 && static_cast<std::size_t>(cfg.features_per_split) < n_feat) {
            candidates = rng.sample_indices(n_feat, static_cast<std::size_t>(cfg.features_per_split));
        } else {
            candidates.resize(n_feat);
            for (std::size_t j = 0; j < n_feat; ++j) candidates[j] = j;
        }

        const double parent_metric = cfg.rule == SplitRule::weighted_gini
                                         ? gini_mass(total)
                                         : grad_score(total, cfg.reg_lambda);

        BestSplit best;
        for (std::size_t f : candidates) {
            scratch.clear();
            for (std::size_t r : rows) scratch.emplace_back(X(r, f), r);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            NodeStats left;
            NodeStats right = total;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                const std::size_t r = scratch[i].second;
                left.add(targets[r], weights[r], cfg.rule);
                right.remove(targets[r], weights[r], cfg.rule);
                if (scratch[i].first == scratch[i + 1].first) continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = scratch.size() - n_left;
                if (n_left < static_cast<std::size_t>(cfg.min_samples_leaf) ||
                    n_right < static_cast<std::size_t>(cfg.min_samples_leaf)) {
                    continue;
                }
                double score;
                if (cfg.rule == SplitRule::weighted_gini) {
                    score = parent_metric - gini_mass(left) - gini_mass(right);
                } else {
                    score = 0.5 * (grad_score(left, cfg.reg_lambda) +
                                   grad_score(right, cfg.reg_lambda) - parent_metric);
                }
                if (score > best.score) {
                    best.feature = static_cast<int>(f);
                    best.threshold = scratch[i].first + 0.5 * (scratch[i + 1].first - scratch[i].first);
                    best.score = score;
                    best.left_count = n_left;
                }
            }
        }

        const bool accept = best.feature >= 0 &&
                            (cfg.rule == SplitRule::weighted_gini ? best.score >= 0.0
                                                                  : best.score > cfg.gamma);
        if (!accept) return node_index;

        if (importance) (*importance)[static_cast<std::size_t>(best.feature)] += std::max(best.score, 0.0);

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(best.left_count);
        right_rows.reserve(rows.size() - best.left_count);
        const std::size_t bf = static_cast<std::size_t>(best.feature);
        for (std::size_t r : rows) {
            (X(r, bf) <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        nodes[static_cast<std::size_t>(node_index)].feature = best.feature;
        nodes[static_cast<std::size_t>(node_index)].threshold = best.threshold;
        const int left_index = grow(left_rows, depth + 1);
        nodes[static_cast<std::size_t>(node_index)].left = left_index;
        const int right_index = grow(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(node_index)].right = right_index;
        return node_index;
    }
};

}  // namespace

Tree fit_tree(const Matrix& X, const std::vector<std::size_t>& rows,
              std::span<const double> targets, std::span<const double> weights,
              const TreeGrowConfig& cfg, Rng& rng, std::vector<double>* importance_accum) {
    if (rows.empty()) fail("train", "fit_tree needs at least one row");
    if (importance_accum && importance_accum->size() != X.cols) {
        importance_accum->assign(X.cols, 0.0);
    }
    Grower grower{X, targets, weights, cfg, rng, importance_accum, {}, {}};
    std::vector<std::size_t> all_rows = rows;
    grower.grow(all_rows, 0);
    Tree t;
    t.nodes = std::move(grower.nodes);
    return t;
}

}  // namespace hrv
