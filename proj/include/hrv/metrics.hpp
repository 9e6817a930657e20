#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hrv {

struct ConfusionMatrix {
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tp = 0;

    std::int64_t total() const { return tn + fp + fn + tp; }
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // a zero denominator was mapped to 0
};

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions);

Prf prf(const ConfusionMatrix& cm);

/// (1+beta^2) P R / (beta^2 P + R); 0 when the denominator is 0.
double fbeta(double precision, double recall, double beta);

struct ThresholdedClassifier {
    double threshold = 0.5;  // predict 1 iff probability >= threshold
    double beta_used = 1.0;
    double best_fbeta = 0.0;  // F-beta attained on the tuning data
};

/// Exact argmax of F-beta over the candidate grid (distinct predicted
/// probabilities plus {0, 1}); ties resolve to the lowest threshold.
ThresholdedClassifier optimize_threshold(std::span<const double> probs,
                                         std::span<const int> labels, double beta);

std::vector<int> apply_threshold(std::span<const double> probs, double threshold);

}  // namespace hrv
