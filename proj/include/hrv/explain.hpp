#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/matrix.hpp"
#include "hrv/model.hpp"

namespace hrv {

struct LimeConfig {
    int n_perturbations = 5000;
    double kernel_width = 0.0;  // 0 = 0.75 * sqrt(n_features)
    int n_bins = 4;             // quantile bins
    int top_k = 15;
    double ridge_lambda = 1.0;
    std::uint64_t seed = 0;
    int n_threads = 0;
};

/// Per-feature quantile bins over the training data. Leftmost/rightmost bins
/// are unbounded; a constant feature collapses to a single flagged bin.
struct QuantileDiscretizer {
    struct Feature {
        std::vector<double> edges;        // interior edges, strictly increasing
        std::vector<double> sorted_vals;  // training values, ascending
        bool constant = false;
    };
    std::vector<Feature> features;

    std::size_t n_bins(std::size_t feature) const { return features[feature].edges.size() + 1; }
    std::size_t bin_of(std::size_t feature, double value) const;
    /// Human-readable interval such as "-0.31 < fFdP <= -0.24".
    std::string bin_condition(std::size_t feature, std::size_t bin, const std::string& name) const;
    std::pair<double, double> bin_bounds(std::size_t feature, std::size_t bin) const;
};

QuantileDiscretizer quantile_discretizer(const Matrix& train_features, int n_bins);

struct ExplanationEntry {
    std::string feature_name;
    std::string bin_condition;
    double bin_low = 0.0;   // -inf for the leftmost bin
    double bin_high = 0.0;  // +inf for the rightmost bin
    double weight = 0.0;
};

struct Explanation {
    std::string instance_id;
    std::vector<ExplanationEntry> entries;  // top_k by |weight|
    double local_intercept = 0.0;
    double surrogate_r2 = 0.0;
    std::vector<double> all_weights;  // per catalog feature, for aggregation
};

/// Perturbs the instance in binned space, queries the model, and fits a
/// weighted ridge surrogate on bin-match indicators. Sample weights follow
/// exp(-d^2 / width^2) with d^2 the number of mismatched bins.
Explanation lime_explain(const TrainedModel& model, std::span<const double> instance,
                         const Dataset& background, const LimeConfig& cfg,
                         const std::string& instance_id = "");

/// Same, against a prebuilt discretizer (saves requantiling per instance).
Explanation lime_explain_prepared(const TrainedModel& model, std::span<const double> instance,
                                  const QuantileDiscretizer& disc,
                                  const std::vector<std::string>& feature_names,
                                  const LimeConfig& cfg, const std::string& instance_id = "");

struct AggregateImportance {
    struct Cell {
        std::string feature_name;
        std::size_t bin = 0;
        double bin_low = 0.0;
        double bin_high = 0.0;
        double mean_weight = 0.0;
        int support = 0;
    };
    std::vector<Cell> cells;  // sorted by |mean_weight| descending
    std::size_t instances_explained = 0;
};

/// Explains a stratified subsample of the test rows (per-instance RNG
/// substreams) and averages signed weights per (feature, bin). When
/// out_explanations is given it receives the per-instance explanations in
/// test-row order.
AggregateImportance aggregate_explanations(const TrainedModel& model, const Dataset& test,
                                           double fraction, const Dataset& background,
                                           const LimeConfig& cfg, std::uint64_t seed,
                                           std::vector<Explanation>* out_explanations = nullptr);

}  // namespace hrv
