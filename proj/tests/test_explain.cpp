#include <doctest.h>

#include <cmath>
#include <map>

#include "hrv/common.hpp"
#include "hrv/explain.hpp"
#include "hrv/gbm.hpp"  // logistic
#include "hrv/rng.hpp"
#include "oracles.hpp"

using namespace hrv;

namespace {

class ConstantProbModel : public TrainedModel {
public:
    ConstantProbModel(double p, std::vector<std::string> names)
        : p_(p), names_(std::move(names)) {}
    std::vector<double> predict_proba(const Matrix& f) const override {
        return std::vector<double>(f.rows, p_);
    }
    std::string kind() const override { return "fixture"; }
    const std::vector<std::string>& feature_names() const override { return names_; }

private:
    double p_;
    std::vector<std::string> names_;
};

class LinearProbModel : public TrainedModel {
public:
    LinearProbModel(std::vector<double> coef, std::vector<std::string> names)
        : coef_(std::move(coef)), names_(std::move(names)) {}
    std::vector<double> predict_proba(const Matrix& f) const override {
        std::vector<double> out(f.rows);
        for (std::size_t r = 0; r < f.rows; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < coef_.size(); ++j) s += coef_[j] * f(r, j);
            out[r] = logistic(0.6 * s);
        }
        return out;
    }
    std::string kind() const override { return "fixture"; }
    const std::vector<std::string>& feature_names() const override { return names_; }

private:
    std::vector<double> coef_;
    std::vector<std::string> names_;
};

Dataset gaussian_background(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    data.features = Matrix(n, d);
    data.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        data.labels[r] = static_cast<int>(r % 2);
        data.row_ids.push_back("b" + std::to_string(r));
        for (std::size_t j = 0; j < d; ++j) data.features(r, j) = rng.normal();
    }
    for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("x" + std::to_string(j));
    return data;
}

}  // namespace

TEST_SUITE("explain") {

TEST_CASE("quantile discretizer places edges at empirical quartiles") {
    Rng rng(3);
    Matrix train(2000, 1);
    for (auto& v : train.data) v = rng.uniform();
    const QuantileDiscretizer disc = quantile_discretizer(train, 4);
    REQUIRE(disc.features[0].edges.size() == 3);
    CHECK(disc.features[0].edges[0] == doctest::Approx(0.25).epsilon(0.15));
    CHECK(disc.features[0].edges[1] == doctest::Approx(0.5).epsilon(0.08));
    CHECK(disc.features[0].edges[2] == doctest::Approx(0.75).epsilon(0.05));
    CHECK_FALSE(disc.features[0].constant);

    CHECK(disc.bin_of(0, -1.0) == 0);
    CHECK(disc.bin_of(0, 0.99) == 3);
    const auto [lo, hi] = disc.bin_bounds(0, 0);
    CHECK(std::isinf(lo));
    CHECK(hi == disc.features[0].edges[0]);
}

TEST_CASE("constant features collapse to one flagged bin") {
    Matrix train(50, 1, 3.25);
    const QuantileDiscretizer disc = quantile_discretizer(train, 4);
    CHECK(disc.features[0].constant);
    CHECK(disc.n_bins(0) == 1);
    CHECK(disc.bin_condition(0, 0, "c") == "c = const");
}

TEST_CASE("two bins split at the median") {
    Matrix train(101, 1);
    for (std::size_t r = 0; r < 101; ++r) train(r, 0) = static_cast<double>(r);
    const QuantileDiscretizer disc = quantile_discretizer(train, 2);
    REQUIRE(disc.features[0].edges.size() == 1);
    CHECK(disc.features[0].edges[0] == doctest::Approx(50.0));
}

TEST_CASE("a constant model earns zero weights and its own intercept") {
    const Dataset background = gaussian_background(300, 4, 9);
    const ConstantProbModel model(0.7, background.feature_names);
    LimeConfig cfg;
    cfg.n_perturbations = 500;
    cfg.seed = 5;
    const Explanation e =
        lime_explain(model, background.features.row(0), background, cfg, "i0");
    for (double w : e.all_weights) CHECK(std::abs(w) < 1e-9);
    CHECK(e.local_intercept == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(e.surrogate_r2 == doctest::Approx(1.0));
}

TEST_CASE("linear model weights recover sign and magnitude order") {
    const std::vector<double> coef = {2.0, -1.0, 0.0};
    int sign_ok = 0, order_ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset background = gaussian_background(400, 3, 100 + seed);
        const LinearProbModel model(coef, background.feature_names);
        // instance in the top bin of every feature
        std::vector<double> instance = {2.5, 2.5, 2.5};
        LimeConfig cfg;
        cfg.n_perturbations = 1500;
        cfg.seed = seed;
        const Explanation e =
            lime_explain(model, instance, background, cfg, "i" + std::to_string(seed));
        const auto& w = e.all_weights;
        if (w[0] > 0.0 && w[1] < 0.0) ++sign_ok;
        if (std::abs(w[2]) < std::abs(w[0]) && std::abs(w[2]) < std::abs(w[1])) ++order_ok;
        CHECK(e.surrogate_r2 >= 0.0);
        CHECK(e.surrogate_r2 <= 1.0);
    }
    CHECK(sign_ok == 10);
    CHECK(order_ok == 10);
}

TEST_CASE("explanations are deterministic given the seed") {
    const Dataset background = gaussian_background(200, 3, 31);
    const LinearProbModel model({1.0, -0.5, 0.25}, background.feature_names);
    LimeConfig cfg;
    cfg.n_perturbations = 400;
    cfg.seed = 77;
    const Explanation a = lime_explain(model, background.features.row(3), background, cfg, "a");
    const Explanation b = lime_explain(model, background.features.row(3), background, cfg, "a");
    CHECK(a.all_weights == b.all_weights);
    CHECK(a.surrogate_r2 == b.surrogate_r2);
    CHECK(a.entries.size() == b.entries.size());
}

TEST_CASE("entry limit and bin conditions follow the instance's bins") {
    const Dataset background = gaussian_background(300, 6, 13);
    const LinearProbModel model({1.0, 0.8, -0.6, 0.4, -0.2, 0.1}, background.feature_names);
    LimeConfig cfg;
    cfg.n_perturbations = 400;
    cfg.top_k = 3;
    cfg.seed = 3;
    const Explanation e =
        lime_explain(model, background.features.row(0), background, cfg, "i");
    CHECK(e.entries.size() == 3);
    for (const auto& entry : e.entries) {
        CHECK((entry.bin_condition.find("<=") != std::string::npos ||
               entry.bin_condition.find(">") != std::string::npos));
    }
}

TEST_CASE("aggregation covers the requested fraction and supports sum correctly") {
    const Dataset background = gaussian_background(200, 3, 41);
    Dataset test = gaussian_background(5, 3, 42);
    const LinearProbModel model({1.0, -1.0, 0.5}, background.feature_names);
    LimeConfig cfg;
    cfg.n_perturbations = 300;
    cfg.seed = 11;
    const AggregateImportance agg =
        aggregate_explanations(model, test, 1.0, background, cfg, 99);
    CHECK(agg.instances_explained == 5);
    int support_total = 0;
    for (const auto& c : agg.cells) support_total += c.support;
    CHECK(support_total == 5 * 3);  // instances x features
}

TEST_CASE("aggregates over disjoint subsets combine linearly") {
    const Dataset background = gaussian_background(250, 3, 55);
    Dataset test = gaussian_background(12, 3, 56);
    const LinearProbModel model({1.5, -0.7, 0.2}, background.feature_names);
    LimeConfig cfg;
    cfg.n_perturbations = 250;
    cfg.seed = 21;

    std::vector<std::size_t> first_half, second_half;
    for (std::size_t r = 0; r < 12; ++r) (r < 6 ? first_half : second_half).push_back(r);
    const Dataset test_a = test.subset_rows(first_half);
    const Dataset test_b = test.subset_rows(second_half);

    const AggregateImportance whole =
        aggregate_explanations(model, test, 1.0, background, cfg, 99);
    const AggregateImportance part_a =
        aggregate_explanations(model, test_a, 1.0, background, cfg, 99);
    const AggregateImportance part_b =
        aggregate_explanations(model, test_b, 1.0, background, cfg, 99);

    // support-weighted means over the union match the whole-set aggregate
    std::map<std::pair<std::string, std::size_t>, std::pair<double, int>> merged;
    for (const auto* part : {&part_a, &part_b}) {
        for (const auto& c : part->cells) {
            auto& slot = merged[{c.feature_name, c.bin}];
            slot.first += c.mean_weight * c.support;
            slot.second += c.support;
        }
    }
    for (const auto& c : whole.cells) {
        const auto& slot = merged.at({c.feature_name, c.bin});
        CHECK(slot.second == c.support);
        CHECK(slot.first / slot.second == doctest::Approx(c.mean_weight).epsilon(1e-9));
    }
}

}  // TEST_SUITE
