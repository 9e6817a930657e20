#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hrv/common.hpp"
#include "hrv/metrics.hpp"
#include "hrv/rng.hpp"

using namespace hrv;

namespace {

// independent full-sweep F-beta evaluation at one threshold
double fbeta_at(std::span<const double> probs, std::span<const int> labels, double thr,
                double beta) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int pred = probs[i] >= thr ? 1 : 0;
        if (labels[i] == 1 && pred == 1) ++tp;
        if (labels[i] == 0 && pred == 1) ++fp;
        if (labels[i] == 1 && pred == 0) ++fn;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    return fbeta(p, r, beta);
}

struct Fixture {
    std::vector<double> probs;
    std::vector<int> labels;
};

Fixture random_fixture(Rng& rng, std::size_t n) {
    Fixture f;
    f.probs.resize(n);
    f.labels.resize(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        f.labels[i] = rng.uniform() < 0.3 ? 1 : 0;
        // correlated but noisy scores, with ties sprinkled in
        const double base = f.labels[i] == 1 ? 0.6 : 0.4;
        f.probs[i] = std::clamp(base + 0.4 * rng.normal(), 0.0, 1.0);
        if (rng.uniform() < 0.2) f.probs[i] = std::round(f.probs[i] * 10.0) / 10.0;
        (f.labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos) f.labels[0] = 1;
    if (!has_neg) f.labels[n - 1] = 0;
    return f;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts exactly") {
    const std::vector<int> labels = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    const std::vector<int> all_pos(10, 1);
    const ConfusionMatrix cm = confusion(labels, all_pos);
    CHECK(cm.tp == 3);
    CHECK(cm.fp == 7);
    CHECK(cm.fn == 0);
    CHECK(cm.tn == 0);

    const ConfusionMatrix perfect = confusion(labels, labels);
    CHECK(perfect.fp == 0);
    CHECK(perfect.fn == 0);
    CHECK(perfect.total() == 10);

    CHECK_THROWS_AS(confusion(labels, std::vector<int>{1}), Error);
}

TEST_CASE("confusion is invariant under row permutation") {
    Rng rng(3);
    std::vector<int> labels(50), preds(50);
    for (std::size_t i = 0; i < 50; ++i) {
        labels[i] = rng.uniform() < 0.4 ? 1 : 0;
        preds[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    const ConfusionMatrix before = confusion(labels, preds);
    std::vector<std::size_t> perm(50);
    for (std::size_t i = 0; i < 50; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<int> labels_p(50), preds_p(50);
    for (std::size_t i = 0; i < 50; ++i) {
        labels_p[i] = labels[perm[i]];
        preds_p[i] = preds[perm[i]];
    }
    const ConfusionMatrix after = confusion(labels_p, preds_p);
    CHECK(before.tp == after.tp);
    CHECK(before.fp == after.fp);
    CHECK(before.fn == after.fn);
    CHECK(before.tn == after.tn);
}

TEST_CASE("reference confusion matrix reproduces the reported metrics") {
    const ConfusionMatrix cm{926, 18, 32, 103};
    const Prf m = prf(cm);
    CHECK(m.precision == doctest::Approx(103.0 / 121.0).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(103.0 / 135.0).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.851).epsilon(1e-3));
    CHECK(m.recall == doctest::Approx(0.763).epsilon(2e-3));
    CHECK(m.f1 == doctest::Approx(0.805).epsilon(1e-3));
    CHECK_FALSE(m.degenerate);
}

TEST_CASE("prf degenerate conventions") {
    const Prf zero = prf(ConfusionMatrix{10, 0, 2, 0});  // no predicted positives
    CHECK(zero.precision == 0.0);
    CHECK(zero.degenerate);

    // precision == recall == p implies f1 == p
    const Prf sym = prf(ConfusionMatrix{5, 3, 3, 9});
    CHECK(sym.precision == sym.recall);
    CHECK(sym.f1 == doctest::Approx(sym.precision).epsilon(1e-12));
}

TEST_CASE("fbeta formula and limits") {
    CHECK(fbeta(0.5, 0.5, 1.0) == doctest::Approx(0.5));
    CHECK(fbeta(0.8, 0.5, 2.0) == doctest::Approx(2.0 / 3.7).epsilon(1e-12));
    CHECK(fbeta(0.9, 0.3, 0.5) > fbeta(0.3, 0.9, 0.5));
    CHECK(fbeta(0.0, 0.0, 1.0) == 0.0);

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const double p = rng.uniform(), r = rng.uniform();
        const double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        CHECK(fbeta(p, r, 1.0) == doctest::Approx(f1).epsilon(1e-12));
    }
}

TEST_CASE("threshold optimization attains 1.0 on separated scores") {
    const std::vector<double> probs = {0.1, 0.15, 0.2, 0.25, 0.6, 0.7, 0.8};
    const std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1};
    const ThresholdedClassifier t = optimize_threshold(probs, labels, 1.0);
    CHECK(t.best_fbeta == doctest::Approx(1.0));
    CHECK(fbeta_at(probs, labels, t.threshold, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("threshold optimization is a true argmax with lowest-threshold ties") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const Fixture f = random_fixture(rng, 40);
        for (double beta : {0.5, 1.0, 2.0}) {
            const ThresholdedClassifier t = optimize_threshold(f.probs, f.labels, beta);
            // exhaustive re-sweep over the candidate grid
            std::vector<double> grid = f.probs;
            grid.push_back(0.0);
            grid.push_back(1.0);
            std::sort(grid.begin(), grid.end());
            grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
            double best = -1.0, best_thr = 2.0;
            for (double thr : grid) {
                const double score = fbeta_at(f.probs, f.labels, thr, beta);
                if (score > best || (score == best && thr < best_thr)) {
                    best = score;
                    best_thr = thr;
                }
            }
            CHECK(t.best_fbeta == doctest::Approx(best).epsilon(1e-12));
            CHECK(t.threshold == doctest::Approx(best_thr).epsilon(1e-12));
        }
    }
}

TEST_CASE("recall-leaning beta never raises the threshold") {
    Rng rng(13);
    for (int rep = 0; rep < 200; ++rep) {
        const Fixture f = random_fixture(rng, 35);
        const double t_low = optimize_threshold(f.probs, f.labels, 2.0).threshold;
        const double t_high = optimize_threshold(f.probs, f.labels, 0.5).threshold;
        CHECK(t_low <= t_high);
    }
}

TEST_CASE("metrics from a confusion matrix equal streaming evaluation") {
    Rng rng(17);
    const Fixture f = random_fixture(rng, 60);
    const auto preds = apply_threshold(f.probs, 0.45);
    const Prf via_cm = prf(confusion(f.labels, preds));

    // streaming recomputation
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == 1 && f.labels[i] == 1) ++tp;
        if (preds[i] == 1 && f.labels[i] == 0) ++fp;
        if (preds[i] == 0 && f.labels[i] == 1) ++fn;
    }
    const double p = tp / (tp + fp);
    const double r = tp / (tp + fn);
    CHECK(via_cm.precision == doctest::Approx(p).epsilon(1e-12));
    CHECK(via_cm.recall == doctest::Approx(r).epsilon(1e-12));
    CHECK(via_cm.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-12));
}

TEST_CASE("threshold optimization rejects single-class labels") {
    const std::vector<double> probs = {0.2, 0.6};
    CHECK_THROWS_AS(optimize_threshold(probs, std::vector<int>{1, 1}, 1.0), Error);
}

}  // TEST_SUITE
