#include "hrv/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hrv/common.hpp"

namespace hrv {

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.size() != predictions.size()) {
        fail("data", "labels and predictions length mismatch");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            predictions[i] == 1 ? ++cm.tp : ++cm.fn;
        } else {
            predictions[i] == 1 ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

Prf prf(const ConfusionMatrix& cm) {
    Prf out;
    const double tp = static_cast<double>(cm.tp);
    if (cm.tp + cm.fp == 0) {
        out.degenerate = true;
    } else {
        out.precision = tp / static_cast<double>(cm.tp + cm.fp);
    }
    if (cm.tp + cm.fn == 0) {
        out.degenerate = true;
    } else {
        out.recall = tp / static_cast<double>(cm.tp + cm.fn);
    }
    if (out.precision + out.recall > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    } else {
        out.degenerate = true;
    }
    return out;
}

double fbeta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

ThresholdedClassifier optimize_threshold(std::span<const double> probs,
                                         std::span<const int> labels, double beta) {
    if (probs.size() != labels.size()) fail("data", "probs and labels length mismatch");
    std::int64_t n_pos = 0;
    for (int y : labels) n_pos += y == 1 ? 1 : 0;
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(labels.size())) {
        fail("data", "threshold optimization needs both classes");
    }

    // Sort descending by probability; at threshold t the predicted-positive
    // set is the prefix with prob >= t, so F-beta follows from prefix sums.
    std::vector<std::size_t> order(probs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return probs[a] > probs[b];
    });

    std::vector<double> grid;
    grid.reserve(probs.size() + 2);
    grid.push_back(1.0);
    for (std::size_t i : order) grid.push_back(probs[i]);
    grid.push_back(0.0);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    ThresholdedClassifier best;
    best.beta_used = beta;
    best.best_fbeta = -1.0;

    const double b2 = beta * beta;
    std::size_t cursor = 0;
    std::int64_t tp = 0, pp = 0;  // true positives, predicted positives in the prefix
    for (double t : grid) {
        while (cursor < order.size() && probs[order[cursor]] >= t) {
            tp += labels[order[cursor]] == 1 ? 1 : 0;
            ++pp;
            ++cursor;
        }
        // F-beta = (1+b^2) tp / (b^2 n_pos + tp + fp), and tp + fp = pp
        const double denom = b2 * static_cast<double>(n_pos) + static_cast<double>(pp);
        const double score = denom > 0.0 ? (1.0 + b2) * static_cast<double>(tp) / denom : 0.0;
        if (score > best.best_fbeta || (score == best.best_fbeta && t < best.threshold)) {
            best.best_fbeta = score;
            best.threshold = t;
        }
    }
    return best;
}

std::vector<int> apply_threshold(std::span<const double> probs, double threshold) {
    std::vector<int> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
    return out;
}

}  // namespace hrv
