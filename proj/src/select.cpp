#include "hrv/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrv/common.hpp"
#include "hrv/rng.hpp"
#include "hrv/stats.hpp"

namespace hrv {

std::string to_string(SelectMethod m) {
    switch (m) {
        case SelectMethod::xgboost: return "xgboost";
        case SelectMethod::randomforest: return "randomforest";
        case SelectMethod::boruta: return "boruta";
        case SelectMethod::bootstrap: return "bootstrap";
        case SelectMethod::boruta_bootstrap: return "boruta_bootstrap";
    }
    return "unknown";
}

double binomial_upper_tail(int n, int h) {
    if (h <= 0) return 1.0;
    if (h > n) return 0.0;
    const double log_half = std::log(0.5);
    double tail = 0.0;
    for (int k = h; k <= n; ++k) {
        const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                               std::lgamma(n - k + 1.0) + n * log_half;
        tail += std::exp(log_pmf);
    }
    return std::min(tail, 1.0);
}

SelectionResult model_based_select(const Dataset& train,
                                   const std::variant<RfConfig, GbmConfig>& learner,
                                   const ThresholdRule& rule) {
    std::vector<double> importances;
    SelectMethod method;
    if (std::holds_alternative<RfConfig>(learner)) {
        importances = train_random_forest(train, std::get<RfConfig>(learner)).importances;
        method = SelectMethod::randomforest;
    } else {
        importances = train_gbm(train, std::get<GbmConfig>(learner)).importances;
        method = SelectMethod::xgboost;
    }

    const std::size_t d = train.n_features();
    double threshold = rule.value;
    if (rule.kind == ThresholdRule::Kind::mean_importance) {
        threshold = std::accumulate(importances.begin(), importances.end(), 0.0) /
                    static_cast<double>(d);
    }

    SelectionResult out;
    out.method = method;
    const double max_imp = *std::max_element(importances.begin(), importances.end());
    const double mean_imp = std::accumulate(importances.begin(), importances.end(), 0.0) /
                            static_cast<double>(d);
    out.low_contrast = max_imp < 2.0 * mean_imp;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return importances[a] > importances[b];
    });
    for (std::size_t j : order) {
        if (importances[j] > threshold) out.selected.push_back(train.feature_names[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        FeatureEvidence e;
        e.feature_name = train.feature_names[j];
        e.importance = importances[j];
        e.selected = importances[j] > threshold;
        out.evidence.push_back(std::move(e));
    }
    return out;
}

std::vector<BorutaVerdict> boruta(const Dataset& train, const BorutaConfig& cfg) {
    if (cfg.n_trials < 10) fail("config", "boruta needs n_trials >= 10");
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_features();

    const ClassWeights weights = balanced_class_weights(train.labels);

    std::vector<int> hit_counts(d, 0);
    std::vector<std::vector<int>> trial_hits(static_cast<std::size_t>(cfg.n_trials));

    parallel_for(static_cast<std::size_t>(cfg.n_trials), cfg.n_threads, [&](std::size_t trial) {
        Rng rng = Rng::substream(cfg.seed, trial);

        // Augment with a shuffled shadow copy of every column.
        Dataset aug;
        aug.labels = train.labels;
        aug.row_ids = train.row_ids;
        aug.feature_names = train.feature_names;
        for (std::size_t j = 0; j < d; ++j) aug.feature_names.push_back("shadow_" + std::to_string(j));
        aug.features = Matrix(n, 2 * d);
        std::vector<std::size_t> perm(n);
        for (std::size_t j = 0; j < d; ++j) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            rng.shuffle(perm);
            for (std::size_t r = 0; r < n; ++r) {
                aug.features(r, j) = train.features(r, j);
                aug.features(r, d + j) = train.features(perm[r], j);
            }
        }

        RfConfig forest_cfg;
        forest_cfg.n_trees = cfg.n_trees;
        forest_cfg.max_depth = cfg.max_depth;
        forest_cfg.class_weights = weights;
        forest_cfg.seed = derive_seed(cfg.seed, 0x426F7275 + trial);
        forest_cfg.n_threads = 1;  // trials already run in parallel
        const ForestModel forest = train_random_forest(aug, forest_cfg);

        double max_shadow = 0.0;
        for (std::size_t j = d; j < 2 * d; ++j) max_shadow = std::max(max_shadow, forest.importances[j]);

        std::vector<int>& hits = trial_hits[trial];
        hits.assign(d, 0);
        for (std::size_t j = 0; j < d; ++j) {
            if (forest.importances[j] > max_shadow) hits[j] = 1;
        }
    });

    for (const auto& hits : trial_hits) {
        for (std::size_t j = 0; j < d; ++j) hit_counts[j] += hits[j];
    }

    std::vector<BorutaVerdict> verdicts(d);
    for (std::size_t j = 0; j < d; ++j) {
        BorutaVerdict& v = verdicts[j];
        v.feature_name = train.feature_names[j];
        v.hit_count = hit_counts[j];
        v.n_trials = cfg.n_trials;
        const double upper = binomial_upper_tail(cfg.n_trials, v.hit_count);
        const double lower = 1.0 - binomial_upper_tail(cfg.n_trials, v.hit_count + 1);
        if (upper < cfg.alpha_binomial) {
            v.status = BorutaStatus::accepted;
        } else if (lower < cfg.alpha_binomial) {
            v.status = BorutaStatus::rejected;
        } else {
            v.status = BorutaStatus::tentative;
        }
    }
    return verdicts;
}

SelectionResult boruta_select(const Dataset& train, const BorutaConfig& cfg) {
    const auto verdicts = boruta(train, cfg);
    SelectionResult out;
    out.method = SelectMethod::boruta;
    for (const auto& v : verdicts) {
        FeatureEvidence e;
        e.feature_name = v.feature_name;
        e.boruta = v;
        e.selected = v.status == BorutaStatus::accepted;
        if (e.selected) out.selected.push_back(v.feature_name);
        out.evidence.push_back(std::move(e));
    }
    return out;
}

SelectionResult bootstrap_select(const Dataset& train, double alpha, int n_boot,
                                 std::uint64_t seed, int n_threads) {
    const auto ranked = rank_features(train, n_boot, seed, alpha, n_threads);

    SelectionResult out;
    out.method = SelectMethod::bootstrap;

    std::vector<const RankedFeature*> by_p;
    for (const auto& rf : ranked) by_p.push_back(&rf);
    std::stable_sort(by_p.begin(), by_p.end(), [](const RankedFeature* a, const RankedFeature* b) {
        return a->bootstrap.p_value < b->bootstrap.p_value;
    });
    for (const auto* rf : by_p) {
        if (rf->bootstrap.p_value < alpha) out.selected.push_back(rf->bootstrap.feature_name);
    }

    // evidence in catalog order
    for (const auto& name : train.feature_names) {
        for (const auto& rf : ranked) {
            if (rf.bootstrap.feature_name == name) {
                FeatureEvidence e;
                e.feature_name = name;
                e.p_value = rf.bootstrap.p_value;
                e.selected = rf.bootstrap.p_value < alpha;
                out.evidence.push_back(std::move(e));
                break;
            }
        }
    }
    return out;
}

SelectionResult hybrid_boruta_bootstrap(const Dataset& train, const BorutaConfig& boruta_cfg,
                                        double alpha, int n_boot, std::uint64_t seed,
                                        int n_threads) {
    const auto verdicts = boruta(train, boruta_cfg);
    const SelectionResult boot = bootstrap_select(train, alpha, n_boot, seed, n_threads);

    std::vector<std::string> accepted;
    for (const auto& v : verdicts) {
        if (v.status == BorutaStatus::accepted) accepted.push_back(v.feature_name);
    }

    SelectionResult out;
    out.method = SelectMethod::boruta_bootstrap;
    for (const auto& name : boot.selected) {  // ascending p among boruta-accepted
        if (std::find(accepted.begin(), accepted.end(), name) != accepted.end()) {
            out.selected.push_back(name);
        }
    }
    for (std::size_t j = 0; j < train.n_features(); ++j) {
        FeatureEvidence e = boot.evidence[j];
        e.boruta = verdicts[j];
        e.selected = std::find(out.selected.begin(), out.selected.end(), e.feature_name) !=
                     out.selected.end();
        out.evidence.push_back(std::move(e));
    }
    return out;
}

}  // namespace hrv
