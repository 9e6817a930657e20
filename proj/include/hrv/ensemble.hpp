#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/matrix.hpp"
#include "hrv/model.hpp"

namespace hrv {

/// Per-row (p_hpm, p_hrm) probabilities. z holds the z-scored columns used
/// by the meta-learners; raw keeps the untransformed pairs for plotting.
struct MetaFeatures {
    Matrix raw;
    Matrix z;
    Standardizer scaler;
    std::vector<std::string> row_ids;
};

/// Fits the scaler on these rows; base models must have been trained on
/// data disjoint from them.
MetaFeatures build_meta_features(const TrainedModel& hpm, const TrainedModel& hrm,
                                 const Dataset& rows);

/// Raw probability pairs without fitting a scaler (for held-out data).
Matrix meta_probabilities(const TrainedModel& hpm, const TrainedModel& hrm, const Dataset& rows);

struct LogisticModel {
    std::vector<double> weights;  // one per meta column
    double bias = 0.0;
    bool converged = false;
    double final_grad_norm = 0.0;
    std::vector<double> nll_trace;  // per accepted iteration

    std::vector<double> predict_proba(const Matrix& features) const;
};

/// Newton (iteratively reweighted least squares) maximum likelihood with
/// step halving; converged when the gradient norm drops below tol.
LogisticModel train_logistic_meta(const Matrix& features, std::span<const int> labels,
                                  int max_iter = 200, double tol = 1e-8);

struct SvmConfig {
    double C = 1.0;
    double gamma = 0.0;  // 0 = "scale": 1 / (n_features * variance of all entries)
    bool balanced_class_weights = true;
    double tolerance = 1e-3;
    int max_passes = 2000;
    int degree = 4;  // stored for config fidelity; inert for the RBF kernel
    std::uint64_t seed = 0;
};

struct SvmModel {
    Matrix support_vectors;
    std::vector<double> alpha_y;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 0.0;
    SvmConfig config;
    int kkt_violations = 0;  // at the returned solution, within tolerance
    bool converged = false;

    double decision(std::span<const double> x) const;
    std::vector<double> decision_values(const Matrix& features) const;
    /// logistic(decision): decision 0 maps to probability 0.5
    std::vector<double> predict_proba(const Matrix& features) const;
};

/// Soft-margin RBF SVM solved by sequential minimal optimization with an
/// error cache; per-class box constraints are C scaled by balanced weights.
SvmModel train_svm_meta(const Matrix& features, std::span<const int> labels,
                        const SvmConfig& cfg);

enum class ManualOutcome { negative = 0, positive = 1, refer = 2 };
enum class CompoundStatus { agree_positive, agree_negative, disagree };

/// Agreement passes the shared label through; disagreement refers the case.
std::pair<ManualOutcome, CompoundStatus> manual_ensemble(int hpm_label, int hrm_label);

double disagreement_rate(std::span<const CompoundStatus> statuses);

}  // namespace hrv
