#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/ensemble.hpp"
#include "hrv/explain.hpp"
#include "hrv/forest.hpp"
#include "hrv/gbm.hpp"
#include "hrv/nnet.hpp"
#include "hrv/select.hpp"
#include "hrv/stats.hpp"

namespace hrv {

/// Whole-run configuration; every hyperparameter defaults to the reference
/// value and can be overridden from a JSON document (schema in README).
struct RunConfig {
    std::string dataset_path = "data/hrv_sepsis.csv";
    std::string label_column = "sepsis";
    std::string catalog = "hrv";  // "hrv" or "from_header"
    bool impute_median = false;
    double test_fraction = 0.25;
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out_dir = "out";

    struct StatsConfig {
        int n_boot = kDefaultBootstrapReplicates;
        double alpha = 0.05;
        int histogram_bins = 30;
        int top_k = 15;
        std::vector<std::string> histogram_features;  // empty = top 2 ranked
    } stats;

    struct SelectConfig {
        BorutaConfig boruta;
        double bootstrap_alpha = 0.05;
        int bootstrap_n_boot = kDefaultBootstrapReplicates;
    } select;

    RfConfig rf;
    GbmConfig gbm;

    MlpConfig nnet;
    double nnet_val_fraction = 0.1;
    std::string nnet_feature_set = "boruta_bootstrap";

    std::vector<double> betas = {0.5, 1.0, 2.0};
    double meta_val_fraction = 0.2;  // training fold held out for thresholds + meta-learners
    SvmConfig svm;

    struct ExplainConfig {
        LimeConfig lime;
        double fraction = 0.2;  // share of test rows explained
    } explain;

    SynthConfig synth{2000, 5, 15, 0.2, 2.0, 7};
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

/// Canonical serialization (sorted keys) used for the manifest config hash.
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace hrv
