#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hrv/common.hpp"
#include "hrv/dataset.hpp"
#include "hrv/forest.hpp"
#include "hrv/rng.hpp"
#include "hrv/stats.hpp"

using namespace hrv;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "hrvsepsis_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("hrv catalog has the 57 unique metric names") {
    const auto& cat = hrv_catalog();
    CHECK(cat.size() == 57);
    CHECK(cat.index_of("Mean.rate").has_value());
    CHECK(cat.index_of("fFdP").has_value());
    CHECK(cat.index_of("Poincar..SD2").has_value());
    CHECK(cat.index_of("SymDp0_2").has_value());
    for (std::size_t i = 0; i < cat.size(); ++i) {
        CHECK(*cat.index_of(cat.entries[i].name) == i);  // unique
    }
}

TEST_CASE("load reorders shuffled columns to catalog order") {
    const auto path = tmp_file("shuffled.csv");
    write_text(path, "b,sepsis,c,a\n4,1,9,1\n5,0,8,2\n6,1,7,3\n");
    const auto catalog = FeatureCatalog::from_names({"a", "b", "c"});
    const Dataset d = load_dataset(path, catalog);
    CHECK(d.n_rows() == 3);
    CHECK(d.feature_names == std::vector<std::string>{"a", "b", "c"});
    CHECK(d.features(0, 0) == 1.0);
    CHECK(d.features(0, 1) == 4.0);
    CHECK(d.features(0, 2) == 9.0);
    CHECK(d.labels == std::vector<int>{1, 0, 1});
}

TEST_CASE("load rejects degenerate or malformed input") {
    const auto catalog = FeatureCatalog::from_names({"a"});
    const auto empty = tmp_file("empty.csv");
    write_text(empty, "a,sepsis\n");
    CHECK_THROWS_AS(load_dataset(empty, catalog), Error);

    const auto missing = tmp_file("missing_col.csv");
    write_text(missing, "b,sepsis\n1,0\n");
    CHECK_THROWS_AS(load_dataset(missing, catalog), Error);

    const auto bad_label = tmp_file("bad_label.csv");
    write_text(bad_label, "a,sepsis\n1,yes\n");
    CHECK_THROWS_AS(load_dataset(bad_label, catalog), Error);

    const auto bad_cell = tmp_file("bad_cell.csv");
    write_text(bad_cell, "a,sepsis\n1,0\nx,1\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_cell, catalog), doctest::Contains("row 2"), Error);
}

TEST_CASE("median imputation fills missing cells when enabled") {
    const auto path = tmp_file("impute.csv");
    write_text(path, "a,sepsis\n1,0\n,1\n3,0\n10,1\n");
    LoadOptions opt;
    opt.impute_median = true;
    const Dataset d = load_dataset(path, FeatureCatalog::from_names({"a"}), opt);
    CHECK(d.features(1, 0) == doctest::Approx(3.0));  // median of {1,3,10}
}

TEST_CASE("paper-scale load: 4314 rows with 538 positives") {
    SynthConfig sc;
    sc.n_rows = 4314;
    sc.n_informative = 1;
    sc.n_noise = 2;
    sc.seed = 3;
    SynthResult s = synth_dataset(sc);
    std::size_t pos = 0;
    for (std::size_t r = 0; r < s.data.n_rows(); ++r) {
        s.data.labels[r] = r < 538 ? 1 : 0;
        pos += s.data.labels[r];
    }
    const auto path = tmp_file("paper_scale.csv");
    save_dataset(s.data, path);
    const Dataset d = load_dataset(path, FeatureCatalog::from_names(s.data.feature_names));
    CHECK(d.n_rows() == 4314);
    CHECK(d.positives() == 538);
}

TEST_CASE("save/load round-trips bit-exact") {
    SynthConfig sc;
    sc.n_rows = 60;
    sc.n_informative = 2;
    sc.n_noise = 3;
    sc.seed = 11;
    const SynthResult s = synth_dataset(sc);
    const auto path = tmp_file("roundtrip.csv");
    save_dataset(s.data, path);
    const Dataset d = load_dataset(path, FeatureCatalog::from_names(s.data.feature_names));
    CHECK(d.features == s.data.features);
    CHECK(d.labels == s.data.labels);
    CHECK(d.row_ids == s.data.row_ids);
}

TEST_CASE("stratified split reproduces the reference test counts") {
    SynthConfig sc;
    sc.n_rows = 4314;
    sc.n_informative = 1;
    sc.n_noise = 1;
    sc.seed = 5;
    SynthResult s = synth_dataset(sc);
    for (std::size_t r = 0; r < s.data.n_rows(); ++r) s.data.labels[r] = r < 538 ? 1 : 0;

    auto [train, test] = stratified_split(s.data, 0.25, 42);
    CHECK(test.n_rows() == 1079);
    CHECK(test.positives() == 135);
    CHECK(train.n_rows() + test.n_rows() == 4314);

    // disjoint and exhaustive by row id
    std::vector<std::string> ids = train.row_ids;
    ids.insert(ids.end(), test.row_ids.begin(), test.row_ids.end());
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    CHECK(ids.size() == 4314);
}

TEST_CASE("stratified split: exact per-class counts and determinism") {
    SynthConfig sc;
    sc.n_rows = 200;
    sc.n_informative = 1;
    sc.n_noise = 1;
    sc.seed = 8;
    SynthResult s = synth_dataset(sc);
    for (std::size_t r = 0; r < 200; ++r) s.data.labels[r] = r < 100 ? 1 : 0;

    auto [train_a, test_a] = stratified_split(s.data, 0.2, 7);
    CHECK(test_a.n_rows() == 40);
    CHECK(test_a.positives() == 20);

    auto [train_b, test_b] = stratified_split(s.data, 0.2, 7);
    CHECK(test_a.row_ids == test_b.row_ids);
    CHECK(train_a.features == train_b.features);

    auto [train_c, test_c] = stratified_split(s.data, 0.2, 99);
    CHECK(test_c.positives() == 20);  // counts stable across seeds
    CHECK(test_c.n_rows() == 40);
    CHECK(test_c.row_ids != test_a.row_ids);
}

TEST_CASE("stratified split rejects degenerate classes") {
    SynthConfig sc;
    sc.n_rows = 10;
    sc.n_informative = 1;
    sc.n_noise = 0;
    sc.seed = 1;
    SynthResult s = synth_dataset(sc);
    for (auto& l : s.data.labels) l = 1;
    CHECK_THROWS_AS(stratified_split(s.data, 0.2, 1), Error);
    s.data.labels[0] = 0;  // one negative only
    CHECK_THROWS_AS(stratified_split(s.data, 0.2, 1), Error);
}

TEST_CASE("balanced class weights match the reference counts") {
    std::vector<int> labels(4314, 0);
    for (std::size_t i = 0; i < 538; ++i) labels[i] = 1;
    const ClassWeights w = balanced_class_weights(labels);
    CHECK(w.weight_positive == doctest::Approx(4314.0 / (2.0 * 538.0)).epsilon(1e-12));
    CHECK(w.weight_negative == doctest::Approx(4314.0 / (2.0 * 3776.0)).epsilon(1e-12));
    CHECK(w.weight_positive == doctest::Approx(4.0093).epsilon(1e-3));
    CHECK(w.weight_negative == doctest::Approx(0.5712).epsilon(1e-3));
    // weighted masses agree
    CHECK(w.weight_positive * 538.0 == doctest::Approx(w.weight_negative * 3776.0).epsilon(1e-12));

    std::vector<int> balanced(10, 0);
    for (int i = 0; i < 5; ++i) balanced[i] = 1;
    const ClassWeights eq = balanced_class_weights(balanced);
    CHECK(eq.weight_positive == 1.0);
    CHECK(eq.weight_negative == 1.0);

    CHECK_THROWS_AS(balanced_class_weights(std::vector<int>(5, 1)), Error);
}

TEST_CASE("standardizer uses the population convention") {
    Matrix m(3, 2);
    m(0, 0) = 2.0; m(1, 0) = 4.0; m(2, 0) = 6.0;
    m(0, 1) = 5.0; m(1, 1) = 5.0; m(2, 1) = 5.0;  // constant column
    const Standardizer s = fit_standardizer(m);
    const Matrix z = apply_standardizer(s, m);
    CHECK(z(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(z(1, 0) == doctest::Approx(0.0));
    CHECK(z(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
    for (std::size_t r = 0; r < 3; ++r) CHECK(z(r, 1) == 0.0);

    const Matrix back = invert_standardizer(s, z);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(back(r, 0) == doctest::Approx(m(r, 0)).epsilon(1e-9));
    }
}

TEST_CASE("standardizer fitted on train leaves test means off zero") {
    Rng rng(4);
    Matrix train(50, 1), test(50, 1);
    for (std::size_t r = 0; r < 50; ++r) {
        train(r, 0) = rng.normal(0.0, 1.0);
        test(r, 0) = rng.normal(2.0, 1.0);  // shifted population
    }
    const Standardizer s = fit_standardizer(train);
    const Matrix zt = apply_standardizer(s, train);
    const Matrix zs = apply_standardizer(s, test);
    double mean_train = 0.0, mean_test = 0.0;
    for (std::size_t r = 0; r < 50; ++r) {
        mean_train += zt(r, 0);
        mean_test += zs(r, 0);
    }
    CHECK(std::abs(mean_train / 50.0) < 1e-9);
    CHECK(std::abs(mean_test / 50.0) > 0.5);
}

TEST_CASE("synthetic generator: class balance and informative signal") {
    SynthConfig sc;
    sc.n_rows = 1000;
    sc.class_balance = 0.5;
    sc.n_informative = 1;
    sc.n_noise = 1;
    sc.seed = 21;
    const SynthResult s = synth_dataset(sc);
    const double pos = static_cast<double>(s.data.positives());
    CHECK(pos > 500.0 - 4.0 * 15.8);  // 4 sigma binomial tolerance
    CHECK(pos < 500.0 + 4.0 * 15.8);
    CHECK(s.informative == std::vector<std::string>{"inf_0"});

    // informative columns reach small bootstrap p-values across seeds
    int significant = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthConfig c;
        c.n_rows = 300;
        c.n_informative = 3;
        c.n_noise = 2;
        c.shift = 2.0;
        c.seed = 100 + seed;
        const SynthResult r = synth_dataset(c);
        std::vector<double> pos_vals, neg_vals;
        for (std::size_t row = 0; row < r.data.n_rows(); ++row) {
            (r.data.labels[row] == 1 ? pos_vals : neg_vals).push_back(r.data.features(row, 0));
        }
        const BootstrapResult b = bootstrap_diff_of_means(pos_vals, neg_vals, 300, seed);
        if (b.p_value < 0.01) ++significant;
    }
    CHECK(significant >= 19);
}

TEST_CASE("all-noise synthetic data caps classifier accuracy at the majority rate") {
    SynthConfig sc;
    sc.n_rows = 500;
    sc.n_informative = 0;
    sc.n_noise = 6;
    sc.class_balance = 0.3;
    sc.seed = 33;
    const SynthResult s = synth_dataset(sc);
    auto [train, test] = stratified_split(s.data, 0.3, 1);

    RfConfig cfg;
    cfg.n_trees = 40;
    cfg.max_depth = 6;
    cfg.class_weights = {1.0, 1.0};  // plain accuracy comparison
    cfg.seed = 2;
    const ForestModel m = train_random_forest(train, cfg);
    const auto probs = m.predict_proba(test.features);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.n_rows(); ++r) {
        correct += (probs[r] >= 0.5 ? 1 : 0) == test.labels[r] ? 1 : 0;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(test.n_rows());
    const double majority =
        static_cast<double>(test.negatives()) / static_cast<double>(test.n_rows());
    CHECK(acc > majority - 0.10);
    CHECK(acc < majority + 0.10);
}

}  // TEST_SUITE
