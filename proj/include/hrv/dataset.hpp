#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hrv/catalog.hpp"
#include "hrv/matrix.hpp"

namespace hrv {

/// Immutable after construction; safe to share across threads.
struct Dataset {
    Matrix features;                         // rows = patients, columns in catalog order
    std::vector<int> labels;                 // 0 = non-sepsis, 1 = Sepsis-3
    std::vector<std::string> row_ids;
    std::vector<std::string> feature_names;  // catalog order

    std::size_t n_rows() const { return features.rows; }
    std::size_t n_features() const { return features.cols; }
    std::size_t positives() const;
    std::size_t negatives() const { return n_rows() - positives(); }

    Dataset subset_rows(const std::vector<std::size_t>& rows) const;
    Dataset subset_features(const std::vector<std::string>& names) const;
};

struct ClassWeights {
    double weight_negative = 1.0;
    double weight_positive = 1.0;

    double of(int label) const { return label == 1 ? weight_positive : weight_negative; }
};

struct LoadOptions {
    std::string label_column = "sepsis";
    bool impute_median = false;  // default: reject rows with missing/non-numeric cells
};

/// Loads a CSV, reorders columns to catalog order, coerces labels to {0,1}.
/// Unknown extra columns are ignored; a "row_id" column, when present, is
/// used as row identity (otherwise sequential ids are generated).
Dataset load_dataset(const std::filesystem::path& path, const FeatureCatalog& catalog,
                     const LoadOptions& options = {});

/// Writes features + label (+ row_id) so that load(save(d)) == d bit-exact.
void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const std::string& label_column = "sepsis");

/// Stratified split; per-class test count = floor(n_c * fraction + 0.5),
/// remainder to train. Deterministic given seed; row order preserved.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed);

/// weight_c = n_total / (2 * n_c); the weighted class masses come out equal.
ClassWeights balanced_class_weights(const std::vector<int>& labels);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // population convention (divide by n)
};

/// Fit on training rows only (no leakage by API shape).
Standardizer fit_standardizer(const Matrix& train_features);
Matrix apply_standardizer(const Standardizer& s, const Matrix& features);
Matrix invert_standardizer(const Standardizer& s, const Matrix& standardized);

struct SynthConfig {
    std::size_t n_rows = 500;
    std::size_t n_informative = 3;
    std::size_t n_noise = 20;
    double class_balance = 0.2;  // P(label = 1)
    double shift = 2.0;          // class-conditional mean shift of informative columns
    std::uint64_t seed = 0;
};

struct SynthResult {
    Dataset data;
    std::vector<std::string> informative;  // names of signal-carrying columns
};

/// Informative columns ~ N(label * shift, 1); noise columns ~ N(0, 1).
SynthResult synth_dataset(const SynthConfig& cfg);

/// Writes the synthetic CSV plus a sidecar listing informative column names.
void save_synth(const SynthResult& s, const std::filesystem::path& csv_path);

}  // namespace hrv
