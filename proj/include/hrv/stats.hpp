#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"

namespace hrv {

struct TestResult {
    std::string feature_name;
    double t_statistic = 0.0;
    double p_value = 1.0;
    double mean_diff = 0.0;  // mean(sepsis) - mean(healthy)
};

struct BootstrapResult {
    std::string feature_name;
    double observed_diff = 0.0;
    double p_value = 1.0;
    int n_boot = 0;
    double ci_low = 0.0;   // 95% percentile interval of the difference
    double ci_high = 0.0;
};

/// Welch unequal-variance t-test with Welch-Satterthwaite degrees of freedom,
/// two-sided p. Both samples constant and equal yields t = 0, p = 1.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Nonparametric bootstrap for the difference of means. Both groups are
/// resampled with replacement; the null follows the shift-to-common-mean
/// scheme and p = (1 + #{|diff*| >= |observed|}) / (n_boot + 1).
BootstrapResult bootstrap_diff_of_means(std::span<const double> a, std::span<const double> b,
                                        int n_boot, std::uint64_t seed);

constexpr int kDefaultBootstrapReplicates = 2000;

struct RankedFeature {
    TestResult t_test;          // on raw feature values
    BootstrapResult bootstrap;  // on standardized feature values
    bool significant = false;   // bootstrap p < alpha
};

/// One result per feature, significant features first in descending
/// |standardized mean difference| (the log10 bar-chart ordering). Each
/// feature draws its RNG stream from (seed, feature_index), so data-parallel
/// evaluation matches the serial order.
std::vector<RankedFeature> rank_features(const Dataset& d, int n_boot, std::uint64_t seed,
                                         double alpha = 0.05, int n_threads = 0);

}  // namespace hrv
