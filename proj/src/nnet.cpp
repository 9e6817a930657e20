#include "hrv/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrv/common.hpp"
#include "hrv/gbm.hpp"  // logistic, weighted_bce
#include "hrv/metrics.hpp"

namespace hrv {

namespace {

// y = x W + b, row-major loops ordered for cache locality
Matrix dense_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix y(x.rows, w.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        double* yrow = y.data.data() + r * y.cols;
        for (std::size_t j = 0; j < w.cols; ++j) yrow[j] = b[j];
        const double* xrow = x.data.data() + r * x.cols;
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double xv = xrow[k];
            const double* wrow = w.data.data() + k * w.cols;
            for (std::size_t j = 0; j < w.cols; ++j) yrow[j] += xv * wrow[j];
        }
    }
    return y;
}

struct LayerTrace {
    Matrix input;      // activations entering the dense op
    Matrix z;          // dense output
    Matrix z_hat;      // normalized
    Matrix post;       // after gamma/beta, pre-ReLU
    Matrix activ;      // after ReLU (and dropout in train mode)
    std::vector<double> mean, var, inv_std;  // batch statistics in use
    std::vector<double> dropout_mask;        // scale factors, empty when off
};

struct Trace {
    std::vector<LayerTrace> layers;
    std::vector<double> scores;  // pre-logistic
    std::vector<double> probs;
};

Trace forward_trace(const MlpModel& model, const Matrix& batch, ForwardMode mode,
                    Rng* dropout_rng) {
    if (batch.cols != model.n_features) {
        fail("data", "feature count mismatch: model expects " + std::to_string(model.n_features) +
                         ", got " + std::to_string(batch.cols));
    }
    if (mode == ForwardMode::train && batch.rows < 2) {
        fail("train", "train-mode forward needs batch size >= 2 for batch statistics");
    }
    const double eps = model.config.batchnorm_epsilon;
    Trace trace;
    trace.layers.resize(model.layers.size());

    Matrix current = batch;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        LayerTrace& lt = trace.layers[l];
        lt.input = std::move(current);
        lt.z = dense_forward(lt.input, layer.W, layer.b);

        const std::size_t m = lt.z.rows;
        const std::size_t u = lt.z.cols;
        lt.mean.assign(u, 0.0);
        lt.var.assign(u, 0.0);
        if (mode == ForwardMode::train) {
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t j = 0; j < u; ++j) lt.mean[j] += lt.z(r, j);
            }
            for (double& v : lt.mean) v /= static_cast<double>(m);
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t j = 0; j < u; ++j) {
                    const double d = lt.z(r, j) - lt.mean[j];
                    lt.var[j] += d * d;
                }
            }
            for (double& v : lt.var) v /= static_cast<double>(m);
        } else {
            lt.mean = layer.run_mean;
            lt.var = layer.run_var;
        }
        lt.inv_std.resize(u);
        for (std::size_t j = 0; j < u; ++j) lt.inv_std[j] = 1.0 / std::sqrt(lt.var[j] + eps);

        lt.z_hat = Matrix(m, u);
        lt.post = Matrix(m, u);
        lt.activ = Matrix(m, u);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < u; ++j) {
                const double zh = (lt.z(r, j) - lt.mean[j]) * lt.inv_std[j];
                lt.z_hat(r, j) = zh;
                const double y = layer.gamma[j] * zh + layer.beta[j];
                lt.post(r, j) = y;
                lt.activ(r, j) = y > 0.0 ? y : 0.0;
            }
        }

        if (mode == ForwardMode::train && dropout_rng != nullptr &&
            model.config.dropout_rate > 0.0) {
            const double rate = model.config.dropout_rate;
            const double scale = 1.0 / (1.0 - rate);
            lt.dropout_mask.resize(m * u);
            for (std::size_t i = 0; i < m * u; ++i) {
                lt.dropout_mask[i] = dropout_rng->uniform() < rate ? 0.0 : scale;
                lt.activ.data[i] *= lt.dropout_mask[i];
            }
        }
        current = lt.activ;
    }

    trace.scores.resize(batch.rows);
    trace.probs.resize(batch.rows);
    for (std::size_t r = 0; r < batch.rows; ++r) {
        double s = model.out_b;
        for (std::size_t j = 0; j < model.out_w.size(); ++j) s += current(r, j) * model.out_w[j];
        trace.scores[r] = s;
        trace.probs[r] = logistic(s);
    }
    return trace;
}

/// Gradients mirroring the parameter layout.
struct Grads {
    struct Layer {
        Matrix W;
        std::vector<double> b, gamma, beta;
    };
    std::vector<Layer> layers;
    std::vector<double> out_w;
    double out_b = 0.0;
};

Grads zero_grads(const MlpModel& model) {
    Grads g;
    g.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        g.layers[l].W = Matrix(layer.W.rows, layer.W.cols);
        g.layers[l].b.assign(layer.b.size(), 0.0);
        g.layers[l].gamma.assign(layer.gamma.size(), 0.0);
        g.layers[l].beta.assign(layer.beta.size(), 0.0);
    }
    g.out_w.assign(model.out_w.size(), 0.0);
    return g;
}

double batch_loss(const MlpModel& model, const Trace& trace, const std::vector<int>& labels) {
    return weighted_bce(trace.probs, labels, model.config.class_weights);
}

// Backprop through the trace; loss is the batch-mean weighted BCE.
Grads backward(const MlpModel& model, const Trace& trace, const std::vector<int>& labels) {
    const std::size_t m = trace.probs.size();
    Grads grads = zero_grads(model);

    // d loss / d score
    std::vector<double> dscore(m);
    for (std::size_t r = 0; r < m; ++r) {
        const double w = model.config.class_weights.of(labels[r]);
        dscore[r] = w * (trace.probs[r] - static_cast<double>(labels[r])) / static_cast<double>(m);
    }

    const Matrix& last_act = trace.layers.back().activ;
    for (std::size_t r = 0; r < m; ++r) {
        grads.out_b += dscore[r];
        for (std::size_t j = 0; j < model.out_w.size(); ++j) {
            grads.out_w[j] += dscore[r] * last_act(r, j);
        }
    }

    // gradient flowing into the activations of the last hidden layer
    Matrix dact(m, model.out_w.size());
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < model.out_w.size(); ++j) {
            dact(r, j) = dscore[r] * model.out_w[j];
        }
    }

    for (std::size_t li = model.layers.size(); li-- > 0;) {
        const auto& layer = model.layers[li];
        const LayerTrace& lt = trace.layers[li];
        const std::size_t u = layer.W.cols;

        if (!lt.dropout_mask.empty()) {
            for (std::size_t i = 0; i < m * u; ++i) dact.data[i] *= lt.dropout_mask[i];
        }
        // ReLU
        for (std::size_t i = 0; i < m * u; ++i) {
            if (lt.post.data[i] <= 0.0) dact.data[i] = 0.0;
        }

        // batchnorm backward (through batch statistics)
        auto& g = grads.layers[li];
        std::vector<double> sum_dy(u, 0.0), sum_dy_zhat(u, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < u; ++j) {
                sum_dy[j] += dact(r, j);
                sum_dy_zhat[j] += dact(r, j) * lt.z_hat(r, j);
            }
        }
        for (std::size_t j = 0; j < u; ++j) {
            g.gamma[j] = sum_dy_zhat[j];
            g.beta[j] = sum_dy[j];
        }
        Matrix dz(m, u);
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < u; ++j) {
                const double dzh = dact(r, j) * layer.gamma[j];
                dz(r, j) = lt.inv_std[j] *
                           (dzh - inv_m * (sum_dy[j] * layer.gamma[j] +
                                           lt.z_hat(r, j) * sum_dy_zhat[j] * layer.gamma[j]));
            }
        }

        // dense backward
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < u; ++j) g.b[j] += dz(r, j);
        }
        for (std::size_t k = 0; k < layer.W.rows; ++k) {
            for (std::size_t r = 0; r < m; ++r) {
                const double xv = lt.input(r, k);
                for (std::size_t j = 0; j < u; ++j) g.W(k, j) += xv * dz(r, j);
            }
        }
        if (li > 0) {
            Matrix dprev(m, layer.W.rows);
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t k = 0; k < layer.W.rows; ++k) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < u; ++j) acc += dz(r, j) * layer.W(k, j);
                    dprev(r, k) = acc;
                }
            }
            dact = std::move(dprev);
        }
    }
    return grads;
}

struct AdamState {
    Grads m, v;
    long t = 0;
};

void adam_step(MlpModel& model, const Grads& grads, AdamState& state) {
    const auto& cfg = model.config;
    ++state.t;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

    auto update = [&](double& param, double grad, double& m_acc, double& v_acc) {
        m_acc = b1 * m_acc + (1.0 - b1) * grad;
        v_acc = b2 * v_acc + (1.0 - b2) * grad * grad;
        const double mh = m_acc / corr1;
        const double vh = v_acc / corr2;
        param -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_epsilon);
    };

    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.W.data.size(); ++i) {
            update(layer.W.data[i], grads.layers[l].W.data[i], state.m.layers[l].W.data[i],
                   state.v.layers[l].W.data[i]);
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            update(layer.b[i], grads.layers[l].b[i], state.m.layers[l].b[i], state.v.layers[l].b[i]);
            update(layer.gamma[i], grads.layers[l].gamma[i], state.m.layers[l].gamma[i],
                   state.v.layers[l].gamma[i]);
            update(layer.beta[i], grads.layers[l].beta[i], state.m.layers[l].beta[i],
                   state.v.layers[l].beta[i]);
        }
    }
    for (std::size_t i = 0; i < model.out_w.size(); ++i) {
        update(model.out_w[i], grads.out_w[i], state.m.out_w[i], state.v.out_w[i]);
    }
    update(model.out_b, grads.out_b, state.m.out_b, state.v.out_b);
}

double f1_of(std::span<const double> probs, std::span<const int> labels) {
    const auto preds = apply_threshold(probs, 0.5);
    return prf(confusion(labels, preds)).f1;
}

}  // namespace

MlpModel init_mlp(const MlpConfig& cfg, std::size_t n_features) {
    if (n_features < 1) fail("config", "need at least one feature");
    if (cfg.units < 1 || cfg.hidden_layers < 1) fail("config", "units and hidden_layers must be >= 1");
    if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) fail("config", "dropout_rate must lie in [0,1)");

    MlpModel model;
    model.config = cfg;
    model.n_features = n_features;
    Rng rng(derive_seed(cfg.seed, 1));

    std::size_t fan_in = n_features;
    const std::size_t units = static_cast<std::size_t>(cfg.units);
    for (int l = 0; l < cfg.hidden_layers; ++l) {
        MlpModel::Layer layer;
        layer.W = Matrix(fan_in, units);
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + units));
        for (double& w : layer.W.data) w = rng.normal(0.0, stddev);
        layer.b.assign(units, 0.0);
        layer.gamma.assign(units, 1.0);
        layer.beta.assign(units, 0.0);
        layer.run_mean.assign(units, 0.0);
        layer.run_var.assign(units, 1.0);
        model.layers.push_back(std::move(layer));
        fan_in = units;
    }
    model.out_w.resize(units);
    const double stddev = std::sqrt(2.0 / static_cast<double>(units + 1));
    for (double& w : model.out_w) w = rng.normal(0.0, stddev);
    model.out_b = 0.0;
    return model;
}

std::vector<double> forward(const MlpModel& model, const Matrix& batch, ForwardMode mode,
                            Rng* dropout_rng) {
    return forward_trace(model, batch, mode, dropout_rng).probs;
}

void apply_inverted_dropout(std::span<double> activations, double rate, Rng& rng) {
    if (rate <= 0.0) return;
    const double scale = 1.0 / (1.0 - rate);
    for (double& a : activations) a *= rng.uniform() < rate ? 0.0 : scale;
}

std::pair<MlpModel, LearningCurve> train_mlp(const Dataset& train, const Dataset& val,
                                             const MlpConfig& cfg) {
    if (train.positives() == 0 || train.negatives() == 0) {
        fail("train", "both classes must be present in train");
    }
    MlpModel model = init_mlp(cfg, train.n_features());
    LearningCurve curve;

    AdamState adam;
    adam.m = zero_grads(model);
    adam.v = zero_grads(model);

    Rng shuffle_rng(derive_seed(cfg.seed, 2));
    Rng dropout_rng(derive_seed(cfg.seed, 3));

    const std::size_t n = train.n_rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t batch_size = static_cast<std::size_t>(std::max(2, cfg.batch_size));
    const double momentum = cfg.batchnorm_momentum;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t end = std::min(start + batch_size, n);
            if (end - start < 2) continue;  // batchnorm needs >= 2 rows

            Matrix batch(end - start, train.n_features());
            std::vector<int> labels(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t r = order[i];
                std::copy(train.features.row(r).begin(), train.features.row(r).end(),
                          batch.row(i - start).begin());
                labels[i - start] = train.labels[r];
            }

            Trace trace = forward_trace(model, batch, ForwardMode::train,
                                        cfg.dropout_rate > 0.0 ? &dropout_rng : nullptr);
            const double loss = batch_loss(model, trace, labels);
            if (!std::isfinite(loss)) {
                fail("train", "non-finite loss at epoch " + std::to_string(epoch));
            }
            const Grads grads = backward(model, trace, labels);
            adam_step(model, grads, adam);

            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto& layer = model.layers[l];
                const auto& lt = trace.layers[l];
                for (std::size_t j = 0; j < layer.run_mean.size(); ++j) {
                    layer.run_mean[j] = momentum * layer.run_mean[j] + (1.0 - momentum) * lt.mean[j];
                    layer.run_var[j] = momentum * layer.run_var[j] + (1.0 - momentum) * lt.var[j];
                }
            }
        }

        LearningCurve::Epoch rec;
        const auto train_probs = forward(model, train.features, ForwardMode::inference);
        rec.train_loss = weighted_bce(train_probs, train.labels, cfg.class_weights);
        rec.train_f1 = f1_of(train_probs, train.labels);
        const auto val_probs = forward(model, val.features, ForwardMode::inference);
        rec.val_loss = weighted_bce(val_probs, val.labels, cfg.class_weights);
        rec.val_f1 = f1_of(val_probs, val.labels);
        curve.epochs.push_back(rec);
    }
    return {std::move(model), std::move(curve)};
}

double gradient_check(MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                      double epsilon) {
    const Trace trace = forward_trace(model, batch, ForwardMode::train, nullptr);
    const Grads analytic = backward(model, trace, labels);

    auto loss_at = [&]() {
        const Trace t = forward_trace(model, batch, ForwardMode::train, nullptr);
        return batch_loss(model, t, labels);
    };

    double max_rel = 0.0;
    auto check_param = [&](double& param, double grad) {
        const double saved = param;
        param = saved + epsilon;
        const double lp = loss_at();
        param = saved - epsilon;
        const double lm = loss_at();
        param = saved;
        const double fd = (lp - lm) / (2.0 * epsilon);
        // 1e-6 floor: below that both sides sit in finite-difference noise
        const double denom = std::max(std::abs(grad) + std::abs(fd), 1e-6);
        max_rel = std::max(max_rel, std::abs(grad - fd) / denom);
    };

    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.W.data.size(); ++i) {
            check_param(layer.W.data[i], analytic.layers[l].W.data[i]);
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            check_param(layer.b[i], analytic.layers[l].b[i]);
            check_param(layer.gamma[i], analytic.layers[l].gamma[i]);
            check_param(layer.beta[i], analytic.layers[l].beta[i]);
        }
    }
    for (std::size_t i = 0; i < model.out_w.size(); ++i) {
        check_param(model.out_w[i], analytic.out_w[i]);
    }
    check_param(model.out_b, analytic.out_b);
    return max_rel;
}

}  // namespace hrv
