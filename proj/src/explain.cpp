#include "hrv/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hrv/common.hpp"
#include "hrv/rng.hpp"

namespace hrv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Type-7 quantile of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Symmetric positive definite solve via Cholesky.
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
        if (diag <= 0.0) fail("internal", "ridge system not positive definite");
        a(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
            a(i, j) = v / a(j, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a(i, k) * b[k];
        b[i] = v / a(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= a(k, i) * b[k];
        b[i] = v / a(i, i);
    }
    return b;
}

}  // namespace

std::size_t QuantileDiscretizer::bin_of(std::size_t feature, double value) const {
    const auto& edges = features[feature].edges;
    std::size_t bin = 0;
    while (bin < edges.size() && value > edges[bin]) ++bin;
    return bin;
}

std::pair<double, double> QuantileDiscretizer::bin_bounds(std::size_t feature,
                                                          std::size_t bin) const {
    const auto& edges = features[feature].edges;
    const double lo = bin == 0 ? -kInf : edges[bin - 1];
    const double hi = bin == edges.size() ? kInf : edges[bin];
    return {lo, hi};
}

std::string QuantileDiscretizer::bin_condition(std::size_t feature, std::size_t bin,
                                               const std::string& name) const {
    const auto [lo, hi] = bin_bounds(feature, bin);
    if (std::isinf(lo) && std::isinf(hi)) return name + " = const";
    if (std::isinf(lo)) return name + " <= " + format_fixed(hi, 2);
    if (std::isinf(hi)) return name + " > " + format_fixed(lo, 2);
    return format_fixed(lo, 2) + " < " + name + " <= " + format_fixed(hi, 2);
}

QuantileDiscretizer quantile_discretizer(const Matrix& train_features, int n_bins) {
    if (n_bins < 2) fail("config", "discretizer needs n_bins >= 2");
    QuantileDiscretizer disc;
    disc.features.resize(train_features.cols);
    for (std::size_t j = 0; j < train_features.cols; ++j) {
        auto& f = disc.features[j];
        f.sorted_vals = train_features.column(j);
        std::sort(f.sorted_vals.begin(), f.sorted_vals.end());
        for (int k = 1; k < n_bins; ++k) {
            const double e = quantile_sorted(f.sorted_vals, static_cast<double>(k) /
                                                                static_cast<double>(n_bins));
            if (f.edges.empty() || e > f.edges.back()) f.edges.push_back(e);
        }
        f.constant = f.edges.empty();
    }
    return disc;
}

namespace {

// Uniform draw of a training value inside the bin; empty bins fall back to
// the bin's numeric range.
double sample_in_bin(const QuantileDiscretizer::Feature& f, std::size_t bin, Rng& rng) {
    const auto& vals = f.sorted_vals;
    const double lo = bin == 0 ? -kInf : f.edges[bin - 1];
    const double hi = bin == f.edges.size() ? kInf : f.edges[bin];
    const auto begin = std::isinf(lo)
                           ? vals.begin()
                           : std::upper_bound(vals.begin(), vals.end(), lo);
    const auto end = std::isinf(hi) ? vals.end() : std::upper_bound(vals.begin(), vals.end(), hi);
    if (begin < end) {
        const std::size_t count = static_cast<std::size_t>(end - begin);
        return *(begin + rng.uniform_index(count));
    }
    if (!std::isinf(lo) && !std::isinf(hi)) return rng.uniform(lo, hi);
    return std::isinf(lo) ? hi : lo;
}

}  // namespace

Explanation lime_explain_prepared(const TrainedModel& model, std::span<const double> instance,
                                  const QuantileDiscretizer& disc,
                                  const std::vector<std::string>& feature_names,
                                  const LimeConfig& cfg, const std::string& instance_id) {
    const std::size_t d = instance.size();
    if (cfg.n_perturbations < 100) fail("config", "lime needs n_perturbations >= 100");
    const std::size_t n = static_cast<std::size_t>(cfg.n_perturbations);
    const double width = cfg.kernel_width > 0.0
                             ? cfg.kernel_width
                             : 0.75 * std::sqrt(static_cast<double>(d));

    std::vector<std::size_t> instance_bins(d);
    for (std::size_t j = 0; j < d; ++j) instance_bins[j] = disc.bin_of(j, instance[j]);

    Rng rng(cfg.seed);
    Matrix numeric(n, d);
    Matrix indicator(n, d);  // 1 when the perturbed bin equals the instance bin
    for (std::size_t j = 0; j < d; ++j) {
        numeric(0, j) = instance[j];
        indicator(0, j) = 1.0;
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t n_bins = disc.n_bins(j);
            const std::size_t bin = n_bins == 1 ? 0 : rng.uniform_index(n_bins);
            numeric(i, j) = sample_in_bin(disc.features[j], bin, rng);
            indicator(i, j) = bin == instance_bins[j] ? 1.0 : 0.0;
        }
    }

    const std::vector<double> target = model.predict_proba(numeric);

    std::vector<double> sample_weight(n);
    const double inv_w2 = 1.0 / (width * width);
    for (std::size_t i = 0; i < n; ++i) {
        double mismatches = 0.0;
        for (std::size_t j = 0; j < d; ++j) mismatches += 1.0 - indicator(i, j);
        sample_weight[i] = std::exp(-mismatches * inv_w2);
    }

    // weighted ridge with unpenalized intercept, via weighted centering
    const double w_total = std::accumulate(sample_weight.begin(), sample_weight.end(), 0.0);
    std::vector<double> x_mean(d, 0.0);
    double y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y_mean += sample_weight[i] * target[i];
        for (std::size_t j = 0; j < d; ++j) x_mean[j] += sample_weight[i] * indicator(i, j);
    }
    y_mean /= w_total;
    for (double& v : x_mean) v /= w_total;

    Matrix xtx(d, d);
    std::vector<double> xty(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sample_weight[i];
        const double yc = target[i] - y_mean;
        for (std::size_t j = 0; j < d; ++j) {
            const double xj = indicator(i, j) - x_mean[j];
            xty[j] += w * xj * yc;
            for (std::size_t k = 0; k <= j; ++k) {
                xtx(j, k) += w * xj * (indicator(i, k) - x_mean[k]);
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        xtx(j, j) += cfg.ridge_lambda;
        for (std::size_t k = 0; k < j; ++k) xtx(k, j) = xtx(j, k);
    }
    const std::vector<double> beta = cholesky_solve(std::move(xtx), xty);

    Explanation out;
    out.instance_id = instance_id;
    out.all_weights = beta;
    double intercept = y_mean;
    for (std::size_t j = 0; j < d; ++j) intercept -= beta[j] * x_mean[j];
    out.local_intercept = intercept;

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = intercept;
        for (std::size_t j = 0; j < d; ++j) pred += beta[j] * indicator(i, j);
        ss_res += sample_weight[i] * (target[i] - pred) * (target[i] - pred);
        ss_tot += sample_weight[i] * (target[i] - y_mean) * (target[i] - y_mean);
    }
    out.surrogate_r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(beta[a]) > std::abs(beta[b]);
    });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k), d);
    for (std::size_t r = 0; r < keep; ++r) {
        const std::size_t j = order[r];
        ExplanationEntry e;
        e.feature_name = feature_names[j];
        e.bin_condition = disc.bin_condition(j, instance_bins[j], feature_names[j]);
        const auto [lo, hi] = disc.bin_bounds(j, instance_bins[j]);
        e.bin_low = lo;
        e.bin_high = hi;
        e.weight = beta[j];
        out.entries.push_back(std::move(e));
    }
    return out;
}

Explanation lime_explain(const TrainedModel& model, std::span<const double> instance,
                         const Dataset& background, const LimeConfig& cfg,
                         const std::string& instance_id) {
    const QuantileDiscretizer disc = quantile_discretizer(background.features, cfg.n_bins);
    return lime_explain_prepared(model, instance, disc, background.feature_names, cfg,
                                 instance_id);
}

AggregateImportance aggregate_explanations(const TrainedModel& model, const Dataset& test,
                                           double fraction, const Dataset& background,
                                           const LimeConfig& cfg, std::uint64_t seed,
                                           std::vector<Explanation>* out_explanations) {
    if (!(fraction > 0.0 && fraction <= 1.0)) fail("config", "fraction must lie in (0,1]");
    const QuantileDiscretizer disc = quantile_discretizer(background.features, cfg.n_bins);

    // stratified subsample of test rows
    std::vector<std::size_t> chosen;
    Rng rng(derive_seed(seed, 0x4C494D45));
    for (int cls : {0, 1}) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < test.n_rows(); ++r) {
            if (test.labels[r] == cls) rows.push_back(r);
        }
        if (rows.empty()) continue;
        rng.shuffle(rows);
        std::size_t take = static_cast<std::size_t>(
            std::floor(static_cast<double>(rows.size()) * fraction + 0.5));
        take = std::clamp<std::size_t>(take, fraction >= 1.0 ? rows.size() : 1, rows.size());
        chosen.insert(chosen.end(), rows.begin(), rows.begin() + take);
    }
    std::sort(chosen.begin(), chosen.end());

    const std::size_t d = test.n_features();
    std::vector<Explanation> explanations(chosen.size());
    std::vector<std::vector<std::size_t>> bins(chosen.size());
    parallel_for(chosen.size(), cfg.n_threads, [&](std::size_t k) {
        const std::size_t r = chosen[k];
        LimeConfig local = cfg;
        // row-id based stream: an instance keeps its perturbations no matter
        // which subset it is explained in
        local.seed = derive_seed(seed, fnv1a64(test.row_ids[r]));
        explanations[k] = lime_explain_prepared(model, test.features.row(r), disc,
                                                test.feature_names, local, test.row_ids[r]);
        bins[k].resize(d);
        for (std::size_t j = 0; j < d; ++j) bins[k][j] = disc.bin_of(j, test.features(r, j));
    });

    // mean signed weight per (feature, bin)
    std::vector<std::vector<double>> weight_sum(d);
    std::vector<std::vector<int>> support(d);
    for (std::size_t j = 0; j < d; ++j) {
        weight_sum[j].assign(disc.n_bins(j), 0.0);
        support[j].assign(disc.n_bins(j), 0);
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            weight_sum[j][bins[k][j]] += explanations[k].all_weights[j];
            support[j][bins[k][j]] += 1;
        }
    }

    AggregateImportance agg;
    agg.instances_explained = chosen.size();
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t b = 0; b < disc.n_bins(j); ++b) {
            if (support[j][b] == 0) continue;
            AggregateImportance::Cell cell;
            cell.feature_name = test.feature_names[j];
            cell.bin = b;
            const auto [lo, hi] = disc.bin_bounds(j, b);
            cell.bin_low = lo;
            cell.bin_high = hi;
            cell.mean_weight = weight_sum[j][b] / static_cast<double>(support[j][b]);
            cell.support = support[j][b];
            agg.cells.push_back(std::move(cell));
        }
    }
    std::stable_sort(agg.cells.begin(), agg.cells.end(), [](const auto& a, const auto& b) {
        return std::abs(a.mean_weight) > std::abs(b.mean_weight);
    });
    if (out_explanations) *out_explanations = std::move(explanations);
    return agg;
}

}  // namespace hrv
