#include "hrv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "hrv/common.hpp"
#include "hrv/rng.hpp"

namespace hrv {

namespace {

struct MeanVar {
    double mean;
    double var;  // sample variance (n - 1)
};

MeanVar mean_and_sample_variance(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : x) {
        const double d = v - mean;
        sq += d * d;
    }
    return {mean, x.size() > 1 ? sq / (n - 1.0) : 0.0};
}

double resampled_mean(std::span<const double> x, Rng& rng) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[rng.uniform_index(x.size())];
    return sum / static_cast<double>(x.size());
}

// Type-7 quantile (linear interpolation) of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) fail("data", "welch_t_test needs at least 2 values per sample");
    const MeanVar ma = mean_and_sample_variance(a);
    const MeanVar mb = mean_and_sample_variance(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    TestResult r;
    r.mean_diff = ma.mean - mb.mean;

    const double se2 = ma.var / na + mb.var / nb;
    if (se2 <= 0.0) {
        // both samples constant: t undefined when means agree, else extreme
        if (r.mean_diff == 0.0) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_statistic = r.mean_diff > 0 ? 1e308 : -1e308;
            r.p_value = 0.0;
        }
        return r;
    }

    r.t_statistic = r.mean_diff / std::sqrt(se2);
    double dof = se2 * se2 /
                 ((ma.var / na) * (ma.var / na) / (na - 1.0) +
                  (mb.var / nb) * (mb.var / nb) / (nb - 1.0));
    if (!std::isfinite(dof) || dof <= 0.0) dof = na + nb - 2.0;

    boost::math::students_t_distribution<double> student(dof);
    r.p_value = 2.0 * boost::math::cdf(student, -std::abs(r.t_statistic));
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    return r;
}

BootstrapResult bootstrap_diff_of_means(std::span<const double> a, std::span<const double> b,
                                        int n_boot, std::uint64_t seed) {
    if (a.empty() || b.empty()) fail("data", "bootstrap needs non-empty samples");
    if (n_boot < 100) fail("config", "n_boot must be >= 100");

    const MeanVar ma = mean_and_sample_variance(a);
    const MeanVar mb = mean_and_sample_variance(b);

    BootstrapResult r;
    r.observed_diff = ma.mean - mb.mean;
    r.n_boot = n_boot;

    // One resampling pass serves both uses: the raw replicate diffs give the
    // percentile interval, and (diff* - observed) is exactly the replicate
    // diff after both groups are shifted to the pooled mean.
    Rng rng(seed);
    std::vector<double> diffs(static_cast<std::size_t>(n_boot));
    int hits = 0;
    const double abs_obs = std::abs(r.observed_diff);
    for (int i = 0; i < n_boot; ++i) {
        const double diff = resampled_mean(a, rng) - resampled_mean(b, rng);
        diffs[static_cast<std::size_t>(i)] = diff;
        if (std::abs(diff - r.observed_diff) >= abs_obs) ++hits;
    }
    r.p_value = (1.0 + static_cast<double>(hits)) / (static_cast<double>(n_boot) + 1.0);

    std::sort(diffs.begin(), diffs.end());
    r.ci_low = quantile_sorted(diffs, 0.025);
    r.ci_high = quantile_sorted(diffs, 0.975);
    return r;
}

std::vector<RankedFeature> rank_features(const Dataset& d, int n_boot, std::uint64_t seed,
                                         double alpha, int n_threads) {
    const std::size_t n_feat = d.n_features();
    const Standardizer scaler = fit_standardizer(d.features);
    const Matrix standardized = apply_standardizer(scaler, d.features);

    std::vector<RankedFeature> results(n_feat);
    parallel_for(n_feat, n_threads, [&](std::size_t j) {
        std::vector<double> raw_pos, raw_neg, std_pos, std_neg;
        for (std::size_t r = 0; r < d.n_rows(); ++r) {
            if (d.labels[r] == 1) {
                raw_pos.push_back(d.features(r, j));
                std_pos.push_back(standardized(r, j));
            } else {
                raw_neg.push_back(d.features(r, j));
                std_neg.push_back(standardized(r, j));
            }
        }
        RankedFeature& rf = results[j];
        rf.t_test = welch_t_test(raw_pos, raw_neg);
        rf.t_test.feature_name = d.feature_names[j];
        rf.bootstrap = bootstrap_diff_of_means(std_pos, std_neg, n_boot, derive_seed(seed, j));
        rf.bootstrap.feature_name = d.feature_names[j];
        rf.significant = rf.bootstrap.p_value < alpha;
    });

    std::vector<std::size_t> order(n_feat);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (results[i].significant != results[j].significant) return results[i].significant;
        const double ai = std::abs(results[i].bootstrap.observed_diff);
        const double aj = std::abs(results[j].bootstrap.observed_diff);
        if (ai != aj) return ai > aj;
        return i < j;
    });

    std::vector<RankedFeature> out;
    out.reserve(n_feat);
    for (std::size_t idx : order) out.push_back(std::move(results[idx]));
    return out;
}

}  // namespace hrv
