#include <doctest.h>

#include <cmath>

#include "hrv/common.hpp"
#include "hrv/dataset.hpp"
#include "hrv/gbm.hpp"  // logistic
#include "hrv/metrics.hpp"
#include "hrv/nnet.hpp"
#include "hrv/rng.hpp"

using namespace hrv;

namespace {

Dataset standardized_blobs(std::size_t n, double gap, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.features = Matrix(n, 2);
    d.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        d.labels[r] = r % 2 == 0 ? 1 : 0;
        const double sign = d.labels[r] == 1 ? 1.0 : -1.0;
        d.features(r, 0) = sign * gap + 0.4 * rng.normal();
        d.features(r, 1) = sign * gap + 0.4 * rng.normal();
        d.row_ids.push_back(std::to_string(r));
    }
    d.feature_names = {"x0", "x1"};
    const Standardizer s = fit_standardizer(d.features);
    d.features = apply_standardizer(s, d.features);
    return d;
}

}  // namespace

TEST_SUITE("nnet") {

TEST_CASE("glorot initialization has the expected spread and repeats bit-exact") {
    MlpConfig cfg;
    cfg.hidden_layers = 1;
    cfg.units = 64;
    cfg.seed = 3;
    const MlpModel m = init_mlp(cfg, 57);
    REQUIRE(m.layers.size() == 1);
    REQUIRE(m.layers[0].W.data.size() == 57 * 64);

    double mean = 0.0;
    for (double w : m.layers[0].W.data) mean += w;
    mean /= static_cast<double>(m.layers[0].W.data.size());
    double var = 0.0;
    for (double w : m.layers[0].W.data) var += (w - mean) * (w - mean);
    var /= static_cast<double>(m.layers[0].W.data.size());
    const double expected = std::sqrt(2.0 / 121.0);  // ~0.1286
    CHECK(std::sqrt(var) == doctest::Approx(expected).epsilon(0.10));

    const MlpModel m2 = init_mlp(cfg, 57);
    CHECK(m.layers[0].W.data == m2.layers[0].W.data);
    CHECK(m.out_w == m2.out_w);

    for (double b : m.layers[0].b) CHECK(b == 0.0);
    for (double g : m.layers[0].gamma) CHECK(g == 1.0);
    for (double v : m.layers[0].run_var) CHECK(v == 1.0);
}

TEST_CASE("width-1 configuration still runs") {
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 1;
    cfg.seed = 1;
    const MlpModel m = init_mlp(cfg, 3);
    Matrix batch(4, 3, 0.5);
    const auto probs = forward(m, batch, ForwardMode::inference);
    REQUIRE(probs.size() == 4);
    for (double p : probs) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("inference is deterministic; train mode needs a real batch") {
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 8;
    cfg.seed = 5;
    const MlpModel m = init_mlp(cfg, 4);
    Matrix batch(6, 4);
    Rng rng(2);
    for (auto& v : batch.data) v = rng.normal();
    CHECK(forward(m, batch, ForwardMode::inference) == forward(m, batch, ForwardMode::inference));

    Matrix single(1, 4, 0.0);
    CHECK_THROWS_AS(forward(m, single, ForwardMode::train), Error);
    CHECK_THROWS_AS(forward(m, Matrix(3, 7), ForwardMode::inference), Error);
}

TEST_CASE("batchnorm is a no-op on an already normalized batch") {
    MlpConfig cfg;
    cfg.hidden_layers = 1;
    cfg.units = 2;
    cfg.dropout_rate = 0.0;
    cfg.batchnorm_epsilon = 1e-9;
    cfg.seed = 1;
    MlpModel m = init_mlp(cfg, 2);
    // identity dense layer
    m.layers[0].W = Matrix(2, 2);
    m.layers[0].W(0, 0) = 1.0;
    m.layers[0].W(1, 1) = 1.0;
    m.layers[0].b = {0.0, 0.0};
    m.out_w = {1.0, 1.0};
    m.out_b = 0.0;

    // columns with exact zero mean / unit population variance
    Matrix batch(2, 2);
    batch(0, 0) = -1.0;
    batch(1, 0) = 1.0;
    batch(0, 1) = 1.0;
    batch(1, 1) = -1.0;

    const auto probs = forward(m, batch, ForwardMode::train, nullptr);
    // batchnorm(z) == z, ReLU keeps positives: row0 -> relu(-1)+relu(1) = 1
    CHECK(probs[0] == doctest::Approx(logistic(1.0)).epsilon(1e-6));
    CHECK(probs[1] == doctest::Approx(logistic(1.0)).epsilon(1e-6));
}

TEST_CASE("forward pass matches an independent re-implementation") {
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 3;
    cfg.dropout_rate = 0.0;
    cfg.seed = 9;
    const MlpModel m = init_mlp(cfg, 3);
    Matrix batch(2, 3);
    Rng rng(4);
    for (auto& v : batch.data) v = rng.normal();

    const auto got = forward(m, batch, ForwardMode::inference);

    // plain-loop recomputation with running statistics
    Matrix act = batch;
    for (const auto& layer : m.layers) {
        Matrix z(act.rows, layer.W.cols);
        for (std::size_t r = 0; r < act.rows; ++r) {
            for (std::size_t j = 0; j < layer.W.cols; ++j) {
                double s = layer.b[j];
                for (std::size_t k = 0; k < act.cols; ++k) s += act(r, k) * layer.W(k, j);
                const double zh =
                    (s - layer.run_mean[j]) / std::sqrt(layer.run_var[j] + cfg.batchnorm_epsilon);
                const double y = layer.gamma[j] * zh + layer.beta[j];
                z(r, j) = y > 0.0 ? y : 0.0;
            }
        }
        act = z;
    }
    for (std::size_t r = 0; r < 2; ++r) {
        double s = m.out_b;
        for (std::size_t j = 0; j < m.out_w.size(); ++j) s += act(r, j) * m.out_w[j];
        CHECK(got[r] == doctest::Approx(logistic(s)).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients agree with central finite differences") {
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 4;
    cfg.dropout_rate = 0.0;
    cfg.class_weights = {0.7, 2.1};
    cfg.seed = 11;
    MlpModel m = init_mlp(cfg, 3);
    Matrix batch(8, 3);
    std::vector<int> labels(8);
    Rng rng(6);
    for (auto& v : batch.data) v = rng.normal();
    for (auto& l : labels) l = rng.uniform() < 0.5 ? 1 : 0;

    const double err = gradient_check(m, batch, labels, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("zero output weights make the bias gradient exact") {
    MlpConfig cfg;
    cfg.hidden_layers = 1;
    cfg.units = 4;
    cfg.dropout_rate = 0.0;
    cfg.seed = 2;
    MlpModel m = init_mlp(cfg, 2);
    for (auto& w : m.out_w) w = 0.0;
    Matrix batch(6, 2);
    std::vector<int> labels(6);
    Rng rng(7);
    for (auto& v : batch.data) v = rng.normal();
    for (std::size_t i = 0; i < 6; ++i) labels[i] = i % 2 == 0 ? 1 : 0;

    // analytic: mean of w_i (sigma(b) - y_i); finite difference on out_b
    const double p = logistic(m.out_b);
    double analytic = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        analytic += cfg.class_weights.of(labels[i]) * (p - labels[i]) / 6.0;
    }
    const double eps = 1e-5;
    auto loss_with_bias = [&](double b) {
        MlpModel probe = m;
        probe.out_b = b;
        const auto probs = forward(probe, batch, ForwardMode::train, nullptr);
        return weighted_bce(probs, labels, cfg.class_weights);
    };
    const double fd = (loss_with_bias(m.out_b + eps) - loss_with_bias(m.out_b - eps)) / (2 * eps);
    CHECK(std::abs(analytic - fd) < 1e-8);
}

TEST_CASE("gradient check errors are stable across step sizes") {
    MlpConfig cfg;
    cfg.hidden_layers = 1;
    cfg.units = 3;
    cfg.dropout_rate = 0.0;
    cfg.seed = 13;
    MlpModel m = init_mlp(cfg, 2);
    Matrix batch(5, 2);
    std::vector<int> labels = {1, 0, 1, 0, 1};
    Rng rng(8);
    for (auto& v : batch.data) v = rng.normal();

    const double e4 = gradient_check(m, batch, labels, 1e-4);
    const double e6 = gradient_check(m, batch, labels, 1e-6);
    CHECK(e4 < 1e-4);
    CHECK(e6 < 1e-4);
}

TEST_CASE("inverted dropout preserves expectations") {
    std::vector<double> base(64, 1.7);
    Rng rng(21);
    double total = 0.0;
    const int passes = 10000;
    for (int i = 0; i < passes; ++i) {
        std::vector<double> v = base;
        apply_inverted_dropout(v, 0.4, rng);
        for (double x : v) total += x;
    }
    const double mean = total / (passes * 64.0);
    // sd of the per-element mean: 1.7 * sqrt(p/(1-p)) / sqrt(N)
    const double sigma = 1.7 * std::sqrt(0.4 / 0.6) / std::sqrt(passes * 64.0);
    CHECK(std::abs(mean - 1.7) < 4.0 * sigma);
}

TEST_CASE("uniformly scaled class weights leave the Adam trajectory unchanged") {
    const Dataset train = standardized_blobs(80, 1.0, 31);
    const Dataset val = standardized_blobs(20, 1.0, 32);
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 6;
    cfg.dropout_rate = 0.2;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = 17;

    cfg.class_weights = {1.0, 1.0};
    const auto [m1, c1] = train_mlp(train, val, cfg);
    cfg.class_weights = {2.0, 2.0};
    const auto [m2, c2] = train_mlp(train, val, cfg);

    const auto p1 = forward(m1, val.features, ForwardMode::inference);
    const auto p2 = forward(m2, val.features, ForwardMode::inference);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-6));
    }
}

TEST_CASE("separable blobs reach validation F1 >= 0.95") {
    const Dataset train = standardized_blobs(200, 1.5, 41);
    const Dataset val = standardized_blobs(60, 1.5, 42);
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 8;
    cfg.dropout_rate = 0.1;
    cfg.epochs = 200;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.005;
    cfg.seed = 19;
    const auto [model, curve] = train_mlp(train, val, cfg);
    REQUIRE(curve.epochs.size() == 200);
    CHECK(curve.epochs.back().val_f1 >= 0.95);

    // training twice with the same seed reproduces predictions bit-exact
    const auto [model2, curve2] = train_mlp(train, val, cfg);
    CHECK(forward(model, val.features, ForwardMode::inference) ==
          forward(model2, val.features, ForwardMode::inference));
}

TEST_CASE("probabilities stay strictly inside (0,1)") {
    const Dataset train = standardized_blobs(60, 3.0, 51);
    MlpConfig cfg;
    cfg.hidden_layers = 2;
    cfg.units = 4;
    cfg.epochs = 30;
    cfg.seed = 23;
    const auto [model, curve] = train_mlp(train, train, cfg);
    for (double p : forward(model, train.features, ForwardMode::inference)) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

}  // TEST_SUITE
