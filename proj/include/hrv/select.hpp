#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/forest.hpp"
#include "hrv/gbm.hpp"

namespace hrv {

enum class SelectMethod { xgboost, randomforest, boruta, bootstrap, boruta_bootstrap };

std::string to_string(SelectMethod m);

enum class BorutaStatus { accepted, rejected, tentative };

struct BorutaVerdict {
    std::string feature_name;
    BorutaStatus status = BorutaStatus::tentative;
    int hit_count = 0;
    int n_trials = 0;
};

struct FeatureEvidence {
    std::string feature_name;
    bool selected = false;
    std::optional<double> importance;
    std::optional<double> p_value;
    std::optional<BorutaVerdict> boruta;
};

struct SelectionResult {
    SelectMethod method;
    std::vector<std::string> selected;       // ordered per method contract
    std::vector<FeatureEvidence> evidence;   // one entry per catalog feature
    bool low_contrast = false;               // importances nearly flat; threshold rule unstable
};

/// Threshold rule for model-based selection. The default keeps features whose
/// importance exceeds the mean importance.
struct ThresholdRule {
    enum class Kind { mean_importance, absolute } kind = Kind::mean_importance;
    double value = 0.0;  // used by absolute
};

SelectionResult model_based_select(const Dataset& train,
                                   const std::variant<RfConfig, GbmConfig>& learner,
                                   const ThresholdRule& rule = {});

struct BorutaConfig {
    int n_trials = 100;
    int n_trees = 200;     // per-trial forest size
    int max_depth = 20;
    double alpha_binomial = 0.01;
    std::uint64_t seed = 0;
    int n_threads = 0;
};

/// Per trial: append a shuffled shadow copy of every column, fit a
/// class-weighted forest, and record a hit for each real feature whose
/// importance exceeds the best shadow importance. Verdicts come from the
/// two-sided binomial test against p = 0.5; Tentative is treated as not
/// selected. Trials use (seed, trial) RNG substreams and merge by index.
std::vector<BorutaVerdict> boruta(const Dataset& train, const BorutaConfig& cfg);

SelectionResult boruta_select(const Dataset& train, const BorutaConfig& cfg);

/// Features with bootstrap p < alpha, ordered by ascending p.
SelectionResult bootstrap_select(const Dataset& train, double alpha, int n_boot,
                                 std::uint64_t seed, int n_threads = 0);

/// Boruta-accepted features that also pass bootstrap significance.
SelectionResult hybrid_boruta_bootstrap(const Dataset& train, const BorutaConfig& boruta_cfg,
                                        double alpha, int n_boot, std::uint64_t seed,
                                        int n_threads = 0);

/// One-sided binomial tail P[Bin(n, 0.5) >= h] (upper) used by the Boruta rule.
double binomial_upper_tail(int n, int h);

}  // namespace hrv
