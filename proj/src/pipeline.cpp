#include "hrv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "hrv/common.hpp"
#include "hrv/csv.hpp"
#include "hrv/ensemble.hpp"
#include "hrv/explain.hpp"
#include "hrv/metrics.hpp"
#include "hrv/rng.hpp"
#include "hrv/stats.hpp"
#include "hrv/svg.hpp"

namespace hrv {

namespace {

using nlohmann::json;

constexpr const char* kLibraryVersion = "hrv-sepsis 0.1.0";

std::string beta_suffix(double beta) {
    if (beta == 0.5) return "0.5";
    if (beta == 1.0) return "1.0";
    if (beta == 2.0) return "2.0";
    return format_double(beta);
}

struct GridRow {
    std::string model;        // "XGBoost" / "RandomForest"
    std::string feature_set;  // selection method name
    double beta = 1.0;
    double threshold = 0.5;
    double val_fbeta = 0.0;
    Prf test;
};

std::string prob_file(const std::string& model, const std::string& set, const std::string& part) {
    return "probs/" + model + "_" + set + "_" + part + ".csv";
}

void write_prob_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                    const std::vector<double>& probs, const std::vector<int>& labels) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        rows.push_back({ids[i], format_double(probs[i]), std::to_string(labels[i])});
    }
    write_csv(path, {"row_id", "prob", "label"}, rows);
}

struct ProbTable {
    std::vector<std::string> ids;
    std::vector<double> probs;
    std::vector<int> labels;
};

ProbTable read_prob_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    ProbTable out;
    for (const auto& row : t.rows) {
        out.ids.push_back(row[0]);
        out.probs.push_back(std::stod(row[1]));
        out.labels.push_back(std::stoi(row[2]));
    }
    return out;
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {}

std::filesystem::path Pipeline::artifact(const std::string& name) const {
    return std::filesystem::path(cfg_.out_dir) / name;
}

const FeatureCatalog& Pipeline::catalog() {
    if (catalog_) return *catalog_;
    if (cfg_.catalog == "hrv") {
        catalog_ = hrv_catalog();
        return *catalog_;
    }
    // from_header: every column except the label and row_id, in file order
    const CsvTable t = read_csv(cfg_.dataset_path);
    std::vector<std::string> names;
    for (const auto& h : t.header) {
        if (h != cfg_.label_column && h != "row_id") names.push_back(h);
    }
    catalog_ = FeatureCatalog::from_names(names);
    return *catalog_;
}

const Dataset& Pipeline::full() {
    if (!full_) {
        LoadOptions opt;
        opt.label_column = cfg_.label_column;
        opt.impute_median = cfg_.impute_median;
        full_ = load_dataset(cfg_.dataset_path, catalog(), opt);
    }
    return *full_;
}

void Pipeline::ensure_split() {
    if (train_) return;
    auto [train, test] = stratified_split(full(), cfg_.test_fraction, cfg_.seed);
    train_ = std::move(train);
    test_ = std::move(test);
}

const Dataset& Pipeline::train_split() {
    ensure_split();
    return *train_;
}

const Dataset& Pipeline::test_split(const std::string& purpose) {
    ensure_split();
    if (std::find(test_access_.begin(), test_access_.end(), purpose) == test_access_.end()) {
        test_access_.push_back(purpose);
    }
    return *test_;
}

void Pipeline::record_stage(const std::string& name, double seconds,
                            std::vector<std::string> artifacts) {
    stage_records_[name] = {seconds, std::move(artifacts)};
    write_manifest();
}

void Pipeline::write_manifest() {
    const auto path = artifact("manifest.json");
    json manifest;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        try {
            in >> manifest;
        } catch (const json::exception&) {
            manifest = json::object();
        }
    }
    manifest["library_version"] = kLibraryVersion;
    manifest["config_hash"] = config_hash(cfg_);
    if (!manifest.contains("stages")) manifest["stages"] = json::object();
    for (const auto& [name, rec] : stage_records_) {
        for (const auto& a : rec.second) {
            if (!std::filesystem::exists(artifact(a))) {
                fail("internal", "stage '" + name + "' did not produce '" + a + "'");
            }
        }
        manifest["stages"][name] = {{"seconds", rec.first}, {"artifacts", rec.second}};
    }
    json access = json::array();
    if (manifest.contains("test_split_access")) {
        for (const auto& v : manifest["test_split_access"]) access.push_back(v);
    }
    for (const auto& p : test_access_) {
        if (std::find(access.begin(), access.end(), json(p)) == access.end()) access.push_back(p);
    }
    manifest["test_split_access"] = access;

    std::filesystem::create_directories(cfg_.out_dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot write '" + path.string() + "'");
    out << manifest.dump(2);
}

void Pipeline::synth() {
    const auto t0 = std::chrono::steady_clock::now();
    const SynthResult s = synth_dataset(cfg_.synth);
    std::filesystem::path p(cfg_.dataset_path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    save_synth(s, p);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("synth", secs, {});
}

void Pipeline::stats() {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset& train = train_split();
    std::vector<std::string> artifacts;

    const auto ranked = rank_features(train, cfg_.stats.n_boot, derive_seed(cfg_.seed, 11),
                                      cfg_.stats.alpha, cfg_.threads);

    // ranked significance table
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& rf : ranked) {
            rows.push_back({rf.t_test.feature_name, format_double(rf.t_test.t_statistic),
                            format_double(rf.bootstrap.p_value),
                            format_double(rf.bootstrap.observed_diff),
                            format_double(rf.bootstrap.ci_low),
                            format_double(rf.bootstrap.ci_high)});
        }
        write_csv(artifact("stats_ranked.csv"), {"feature", "t", "p", "mean_diff", "ci_low", "ci_high"},
                  rows);
        artifacts.push_back("stats_ranked.csv");
    }

    // top-k bar chart of log10 |standardized mean difference|
    {
        std::vector<BarDatum> bars;
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg_.stats.top_k),
                                                    ranked.size());
        for (std::size_t i = 0; i < k; ++i) {
            const double amd = std::abs(ranked[i].bootstrap.observed_diff);
            bars.push_back({ranked[i].bootstrap.feature_name,
                            amd > 0.0 ? std::log10(amd) : -12.0});
        }
        svg_bar_chart(artifact("fig3_top_features.svg"),
                      "Top " + std::to_string(k) + " features by bootstrap difference of means",
                      bars, "log10 |difference in means| (standardized)");
        artifacts.push_back("fig3_top_features.svg");
    }

    // per-feature relative histograms
    std::vector<std::string> hist_features = cfg_.stats.histogram_features;
    if (hist_features.empty()) {
        for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i) {
            hist_features.push_back(ranked[i].bootstrap.feature_name);
        }
    }
    for (const auto& name : hist_features) {
        const auto idx = std::find(train.feature_names.begin(), train.feature_names.end(), name);
        if (idx == train.feature_names.end()) fail("config", "unknown histogram feature '" + name + "'");
        const std::size_t j = static_cast<std::size_t>(idx - train.feature_names.begin());

        double lo = train.features(0, j), hi = lo;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            lo = std::min(lo, train.features(r, j));
            hi = std::max(hi, train.features(r, j));
        }
        if (hi == lo) hi = lo + 1.0;
        const int nb = cfg_.stats.histogram_bins;
        std::vector<std::int64_t> count_neg(nb, 0), count_pos(nb, 0);
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            int b = static_cast<int>(std::floor((train.features(r, j) - lo) / (hi - lo) *
                                                static_cast<double>(nb)));
            b = std::clamp(b, 0, nb - 1);
            (train.labels[r] == 1 ? count_pos : count_neg)[b] += 1;
        }
        const double n_neg = static_cast<double>(train.negatives());
        const double n_pos = static_cast<double>(train.positives());

        HistogramPair hp;
        std::vector<std::vector<std::string>> rows;
        for (int b = 0; b <= nb; ++b) {
            hp.bin_edges.push_back(lo + (hi - lo) * static_cast<double>(b) / nb);
        }
        for (int b = 0; b < nb; ++b) {
            hp.freq_a.push_back(static_cast<double>(count_neg[b]) / n_neg);
            hp.freq_b.push_back(static_cast<double>(count_pos[b]) / n_pos);
            rows.push_back({format_double(hp.bin_edges[b]), format_double(hp.bin_edges[b + 1]),
                            std::to_string(count_neg[b]), std::to_string(count_pos[b]),
                            format_double(hp.freq_a[b]), format_double(hp.freq_b[b])});
        }
        const std::string base = "stats_hist_" + name;
        write_csv(artifact(base + ".csv"),
                  {"bin_low", "bin_high", "count_healthy", "count_sepsis", "rel_freq_healthy",
                   "rel_freq_sepsis"},
                  rows);
        svg_histogram_pair(artifact("fig2_" + base + ".svg"), name + " by sepsis status", hp,
                           "non-sepsis", "sepsis");
        artifacts.push_back(base + ".csv");
        artifacts.push_back("fig2_" + base + ".svg");
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("stats", secs, std::move(artifacts));
}

void Pipeline::select() {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset& train = train_split();

    GbmConfig gbm_cfg = cfg_.gbm;
    gbm_cfg.class_weights = balanced_class_weights(train.labels);
    gbm_cfg.seed = derive_seed(cfg_.seed, 21);
    gbm_cfg.n_threads = cfg_.threads;
    RfConfig rf_cfg = cfg_.rf;
    rf_cfg.class_weights = gbm_cfg.class_weights;
    rf_cfg.seed = derive_seed(cfg_.seed, 22);
    rf_cfg.n_threads = cfg_.threads;
    BorutaConfig boruta_cfg = cfg_.select.boruta;
    boruta_cfg.seed = derive_seed(cfg_.seed, 23);
    boruta_cfg.n_threads = cfg_.threads;

    const SelectionResult by_gbm = model_based_select(train, gbm_cfg);
    const SelectionResult by_rf = model_based_select(train, rf_cfg);
    const SelectionResult by_boot = bootstrap_select(train, cfg_.select.bootstrap_alpha,
                                                     cfg_.select.bootstrap_n_boot,
                                                     derive_seed(cfg_.seed, 24), cfg_.threads);
    const SelectionResult by_boruta = boruta_select(train, boruta_cfg);
    // hybrid reuses the same bootstrap stream so its p-values match by_boot
    const SelectionResult by_hybrid =
        hybrid_boruta_bootstrap(train, boruta_cfg, cfg_.select.bootstrap_alpha,
                                cfg_.select.bootstrap_n_boot, derive_seed(cfg_.seed, 24),
                                cfg_.threads);

    const std::vector<const SelectionResult*> methods = {&by_gbm, &by_rf, &by_boruta, &by_boot,
                                                         &by_hybrid};

    // Y/N grid across the five methods
    {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t j = 0; j < train.n_features(); ++j) {
            const std::string& name = train.feature_names[j];
            std::vector<std::string> row{name};
            for (const auto* m : methods) {
                const bool in = std::find(m->selected.begin(), m->selected.end(), name) !=
                                m->selected.end();
                row.push_back(in ? "Y" : "N");
            }
            rows.push_back(std::move(row));
        }
        write_csv(artifact("selection_grid.csv"),
                  {"feature", "xgboost", "randomforest", "boruta", "bootstrap", "boruta_bootstrap"},
                  rows);
    }

    // long-form evidence
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto* m : methods) {
            for (const auto& e : m->evidence) {
                std::string status, hits;
                if (e.boruta) {
                    status = e.boruta->status == BorutaStatus::accepted   ? "accepted"
                             : e.boruta->status == BorutaStatus::rejected ? "rejected"
                                                                          : "tentative";
                    hits = std::to_string(e.boruta->hit_count);
                }
                rows.push_back({e.feature_name, to_string(m->method), e.selected ? "Y" : "N",
                                e.importance ? format_double(*e.importance) : "",
                                e.p_value ? format_double(*e.p_value) : "", status, hits});
            }
        }
        write_csv(artifact("selection_evidence.csv"),
                  {"feature", "method", "selected", "importance", "p_value", "boruta_status",
                   "hit_count"},
                  rows);
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("select", secs, {"selection_grid.csv", "selection_evidence.csv"});
}

std::vector<std::string> Pipeline::feature_set(const std::string& method) {
    const CsvTable grid = read_csv(artifact("selection_grid.csv"));
    const std::size_t col = grid.column_index(method);
    std::vector<std::string> names;
    for (const auto& row : grid.rows) {
        if (row[col] == "Y") names.push_back(row[0]);
    }
    if (names.empty()) {
        // a selection method may legitimately come up empty on noise data;
        // training falls back to the full catalog so the grid stays complete
        for (const auto& row : grid.rows) names.push_back(row[0]);
    }
    return names;
}

void Pipeline::train() {
    if (!std::filesystem::exists(artifact("selection_grid.csv"))) select();
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset& train_data = train_split();
    const Dataset& test_data = test_split("evaluate");
    std::vector<std::string> artifacts;

    // base/validation fold: thresholds and meta-learners tune on val only
    auto [base_fold, val_fold] =
        stratified_split(train_data, cfg_.meta_val_fraction, derive_seed(cfg_.seed, 31));
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& id : base_fold.row_ids) rows.push_back({id, "base"});
        for (const auto& id : val_fold.row_ids) rows.push_back({id, "val"});
        write_csv(artifact("folds.csv"), {"row_id", "fold"}, rows);
        artifacts.push_back("folds.csv");
    }

    const std::vector<std::string> sets = {"xgboost", "randomforest", "boruta", "bootstrap",
                                           "boruta_bootstrap"};
    std::vector<GridRow> grid_rows;
    std::unique_ptr<TrainedModel> best_ml_model;
    std::string best_ml_kind;
    double best_ml_f1 = -1.0;
    Prf best_ml_prf;

    for (const std::string& model_name : {std::string("XGBoost"), std::string("RandomForest")}) {
        for (std::size_t set_idx = 0; set_idx < sets.size(); ++set_idx) {
            const auto& set = sets[set_idx];
            const auto features = feature_set(set);
            const Dataset base = base_fold.subset_features(features);
            const Dataset val = val_fold.subset_features(features);
            const Dataset test = test_data.subset_features(features);

            std::unique_ptr<TrainedModel> model;
            if (model_name == "XGBoost") {
                GbmConfig c = cfg_.gbm;
                c.class_weights = balanced_class_weights(base.labels);
                c.seed = derive_seed(cfg_.seed, 4100 + set_idx);
                c.n_threads = cfg_.threads;
                model = std::make_unique<GbmPredictor>(train_gbm(base, c));
            } else {
                RfConfig c = cfg_.rf;
                c.class_weights = balanced_class_weights(base.labels);
                c.seed = derive_seed(cfg_.seed, 5100 + set_idx);
                c.n_threads = cfg_.threads;
                model = std::make_unique<ForestPredictor>(train_random_forest(base, c));
            }

            const auto val_probs = model->predict_proba(val.features);
            const auto test_probs = model->predict_proba(test.features);
            write_prob_csv(artifact(prob_file(model_name, set, "val")), val.row_ids, val_probs,
                           val.labels);
            write_prob_csv(artifact(prob_file(model_name, set, "test")), test.row_ids, test_probs,
                           test.labels);
            artifacts.push_back(prob_file(model_name, set, "val"));
            artifacts.push_back(prob_file(model_name, set, "test"));

            for (double beta : cfg_.betas) {
                const ThresholdedClassifier th = optimize_threshold(val_probs, val.labels, beta);
                GridRow row;
                row.model = model_name;
                row.feature_set = set;
                row.beta = beta;
                row.threshold = th.threshold;
                row.val_fbeta = th.best_fbeta;
                row.test = prf(confusion(test.labels, apply_threshold(test_probs, th.threshold)));
                grid_rows.push_back(row);

                if (beta == 1.0 && row.test.f1 > best_ml_f1) {
                    best_ml_f1 = row.test.f1;
                    best_ml_prf = row.test;
                    best_ml_kind = model_name + " / " + set;
                    if (model_name == "XGBoost") {
                        best_ml_model = std::make_unique<GbmPredictor>(
                            static_cast<GbmPredictor*>(model.get())->model());
                    } else {
                        best_ml_model = std::make_unique<ForestPredictor>(
                            static_cast<ForestPredictor*>(model.get())->model());
                    }
                }
            }
        }
    }

    // per-beta tables, primary metric first like the reference tables
    for (double beta : cfg_.betas) {
        std::vector<GridRow> rows;
        for (const auto& r : grid_rows) {
            if (r.beta == beta) rows.push_back(r);
        }
        std::stable_sort(rows.begin(), rows.end(), [&](const GridRow& a, const GridRow& b) {
            if (a.model != b.model) return a.model < b.model;
            const double ka = beta < 1.0 ? a.test.precision : beta > 1.0 ? a.test.recall : a.test.f1;
            const double kb = beta < 1.0 ? b.test.precision : beta > 1.0 ? b.test.recall : b.test.f1;
            return ka > kb;
        });
        std::vector<std::vector<std::string>> csv_rows;
        for (const auto& r : rows) {
            csv_rows.push_back({r.model, r.feature_set, format_double(r.test.f1),
                                format_double(r.test.precision), format_double(r.test.recall)});
        }
        const std::string name = "metrics_beta_" + beta_suffix(beta) + ".csv";
        write_csv(artifact(name), {"model", "feature_set", "f1", "precision", "recall"}, csv_rows);
        artifacts.push_back(name);
    }

    // threshold table for the ensemble stage
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : grid_rows) {
            rows.push_back({r.model, r.feature_set, format_double(r.beta),
                            format_double(r.threshold), format_double(r.val_fbeta)});
        }
        write_csv(artifact("thresholds.csv"),
                  {"model", "feature_set", "beta", "threshold", "val_fbeta"}, rows);
        artifacts.push_back("thresholds.csv");
    }

    // baseline: default-config boosting on all features, 0.5 threshold
    Prf baseline;
    {
        GbmConfig c = cfg_.gbm;
        c.class_weights = balanced_class_weights(train_data.labels);
        c.seed = derive_seed(cfg_.seed, 61);
        c.n_threads = cfg_.threads;
        const GbmModel m = train_gbm(train_data, c);
        const auto probs = m.predict_proba(test_data.features);
        baseline = prf(confusion(test_data.labels, apply_threshold(probs, 0.5)));
    }

    if (best_ml_model) {
        save_model(*best_ml_model, artifact("models/best_ml.json"));
        artifacts.push_back("models/best_ml.json");
    }

    // neural network on the configured feature set
    Prf nn_prf;
    {
        const auto features = feature_set(cfg_.nnet_feature_set);
        const Dataset nn_full = train_data.subset_features(features);
        auto [nn_train, nn_val] =
            stratified_split(nn_full, cfg_.nnet_val_fraction, derive_seed(cfg_.seed, 71));
        const Standardizer scaler = fit_standardizer(nn_train.features);

        Dataset nn_train_std = nn_train;
        nn_train_std.features = apply_standardizer(scaler, nn_train.features);
        Dataset nn_val_std = nn_val;
        nn_val_std.features = apply_standardizer(scaler, nn_val.features);

        MlpConfig mc = cfg_.nnet;
        mc.class_weights = balanced_class_weights(nn_train.labels);
        mc.seed = derive_seed(cfg_.seed, 72);
        auto [mlp, curve] = train_mlp(nn_train_std, nn_val_std, mc);

        {
            std::vector<std::vector<std::string>> rows;
            for (std::size_t e = 0; e < curve.epochs.size(); ++e) {
                const auto& rec = curve.epochs[e];
                rows.push_back({std::to_string(e + 1), format_double(rec.train_loss),
                                format_double(rec.val_loss), format_double(rec.train_f1),
                                format_double(rec.val_f1)});
            }
            write_csv(artifact("learning_curve.csv"),
                      {"epoch", "train_loss", "val_loss", "train_f1", "val_f1"}, rows);
            std::vector<Series> loss_series(2), f1_series(2);
            loss_series[0].name = "train loss";
            loss_series[1].name = "val loss";
            f1_series[0].name = "train F1";
            f1_series[1].name = "val F1";
            for (const auto& rec : curve.epochs) {
                loss_series[0].values.push_back(rec.train_loss);
                loss_series[1].values.push_back(rec.val_loss);
                f1_series[0].values.push_back(rec.train_f1);
                f1_series[1].values.push_back(rec.val_f1);
            }
            svg_line_chart(artifact("fig4_loss.svg"), "Learning curve: loss", loss_series,
                           "epoch", "weighted BCE");
            svg_line_chart(artifact("fig4_f1.svg"), "Learning curve: F1", f1_series, "epoch",
                           "F1");
            artifacts.insert(artifacts.end(), {"learning_curve.csv", "fig4_loss.svg", "fig4_f1.svg"});
        }

        MlpPredictor predictor(std::move(mlp), scaler, features);
        const Dataset test = test_data.subset_features(features);
        const auto probs = predictor.predict_proba(test.features);
        const auto preds = apply_threshold(probs, 0.5);
        const ConfusionMatrix cm = confusion(test.labels, preds);
        nn_prf = prf(cm);
        write_csv(artifact("confusion_nn.csv"), {"tn", "fp", "fn", "tp"},
                  {{std::to_string(cm.tn), std::to_string(cm.fp), std::to_string(cm.fn),
                    std::to_string(cm.tp)}});
        save_model(predictor, artifact("models/nnet.json"));
        artifacts.insert(artifacts.end(), {"confusion_nn.csv", "models/nnet.json"});
    }

    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Baseline XGBoost", format_double(baseline.f1),
                        format_double(baseline.precision), format_double(baseline.recall)});
        rows.push_back({"Best ML Model (" + best_ml_kind + ")", format_double(best_ml_prf.f1),
                        format_double(best_ml_prf.precision), format_double(best_ml_prf.recall)});
        rows.push_back({"Neural Network", format_double(nn_prf.f1),
                        format_double(nn_prf.precision), format_double(nn_prf.recall)});
        write_csv(artifact("table7_rows_train.csv"), {"model", "f1", "precision", "recall"}, rows);
        artifacts.push_back("table7_rows_train.csv");
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("train", secs, std::move(artifacts));
}

void Pipeline::ensemble() {
    if (!std::filesystem::exists(artifact("thresholds.csv"))) train();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> artifacts;

    // pick HPM / HRM: best validation F-beta at beta 0.5 / 2.0
    struct Pick {
        std::string model, set;
        double threshold = 0.5;
        double score = -1.0;
    };
    Pick hpm, hrm;
    {
        const CsvTable t = read_csv(artifact("thresholds.csv"));
        for (const auto& row : t.rows) {
            const double beta = std::stod(row[2]);
            const double val_fbeta = std::stod(row[4]);
            if (beta == 0.5 && val_fbeta > hpm.score) {
                hpm = {row[0], row[1], std::stod(row[3]), val_fbeta};
            }
            if (beta == 2.0 && val_fbeta > hrm.score) {
                hrm = {row[0], row[1], std::stod(row[3]), val_fbeta};
            }
        }
        if (hpm.score < 0.0 || hrm.score < 0.0) {
            fail("data", "thresholds.csv lacks beta 0.5 / 2.0 rows; run train with those betas");
        }
    }

    const ProbTable hpm_val = read_prob_csv(artifact(prob_file(hpm.model, hpm.set, "val")));
    const ProbTable hrm_val = read_prob_csv(artifact(prob_file(hrm.model, hrm.set, "val")));
    const ProbTable hpm_test = read_prob_csv(artifact(prob_file(hpm.model, hpm.set, "test")));
    const ProbTable hrm_test = read_prob_csv(artifact(prob_file(hrm.model, hrm.set, "test")));

    auto pair_matrix = [](const ProbTable& a, const ProbTable& b) {
        if (a.ids != b.ids) fail("data", "probability files disagree on rows");
        Matrix m(a.probs.size(), 2);
        for (std::size_t i = 0; i < a.probs.size(); ++i) {
            m(i, 0) = a.probs[i];
            m(i, 1) = b.probs[i];
        }
        return m;
    };
    const Matrix meta_raw_val = pair_matrix(hpm_val, hrm_val);
    const Matrix meta_raw_test = pair_matrix(hpm_test, hrm_test);

    const Standardizer meta_scaler = fit_standardizer(meta_raw_val);
    const Matrix meta_val = apply_standardizer(meta_scaler, meta_raw_val);
    const Matrix meta_test = apply_standardizer(meta_scaler, meta_raw_test);

    const LogisticModel logit = train_logistic_meta(meta_val, hpm_val.labels);
    SvmConfig svm_cfg = cfg_.svm;
    svm_cfg.seed = derive_seed(cfg_.seed, 81);
    const SvmModel svm = train_svm_meta(meta_val, hpm_val.labels, svm_cfg);

    const Prf lr_prf = prf(confusion(hpm_test.labels,
                                     apply_threshold(logit.predict_proba(meta_test), 0.5)));
    const Prf svm_prf = prf(confusion(hpm_test.labels,
                                      apply_threshold(svm.predict_proba(meta_test), 0.5)));

    // manual rule ensemble on thresholded test labels
    const auto hpm_labels = apply_threshold(hpm_test.probs, hpm.threshold);
    const auto hrm_labels = apply_threshold(hrm_test.probs, hrm.threshold);
    std::vector<CompoundStatus> statuses(hpm_labels.size());
    std::vector<int> fallback_preds(hpm_labels.size());  // Refer counted as the HPM label
    std::vector<int> agreed_labels, agreed_preds;
    for (std::size_t i = 0; i < hpm_labels.size(); ++i) {
        const auto [outcome, status] = manual_ensemble(hpm_labels[i], hrm_labels[i]);
        statuses[i] = status;
        fallback_preds[i] = outcome == ManualOutcome::refer ? hpm_labels[i]
                                                            : static_cast<int>(outcome);
        if (status != CompoundStatus::disagree) {
            agreed_labels.push_back(hpm_test.labels[i]);
            agreed_preds.push_back(static_cast<int>(outcome));
        }
    }
    const double disagree = disagreement_rate(statuses);
    const Prf manual_fallback = prf(confusion(hpm_test.labels, fallback_preds));
    const ConfusionMatrix agreed_cm = confusion(agreed_labels, agreed_preds);
    const Prf manual_agreed = prf(agreed_cm);
    const double agreed_accuracy =
        agreed_cm.total() > 0
            ? static_cast<double>(agreed_cm.tp + agreed_cm.tn) / static_cast<double>(agreed_cm.total())
            : 0.0;

    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"hpm", hpm.model, hpm.set, format_double(hpm.threshold)});
        rows.push_back({"hrm", hrm.model, hrm.set, format_double(hrm.threshold)});
        write_csv(artifact("ensemble_base_models.csv"), {"role", "model", "feature_set", "threshold"},
                  rows);
        artifacts.push_back("ensemble_base_models.csv");
    }
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Ensemble: Logistic Regression", format_double(lr_prf.f1),
                        format_double(lr_prf.precision), format_double(lr_prf.recall)});
        rows.push_back({"Ensemble: SVM", format_double(svm_prf.f1),
                        format_double(svm_prf.precision), format_double(svm_prf.recall)});
        write_csv(artifact("table7_rows_ensemble.csv"), {"model", "f1", "precision", "recall"},
                  rows);
        artifacts.push_back("table7_rows_ensemble.csv");
    }
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"disagreement_rate", format_double(disagree)});
        rows.push_back({"fallback_f1", format_double(manual_fallback.f1)});
        rows.push_back({"fallback_precision", format_double(manual_fallback.precision)});
        rows.push_back({"fallback_recall", format_double(manual_fallback.recall)});
        rows.push_back({"agreed_recall", format_double(manual_agreed.recall)});
        rows.push_back({"agreed_precision", format_double(manual_agreed.precision)});
        rows.push_back({"agreed_accuracy", format_double(agreed_accuracy)});
        write_csv(artifact("manual_ensemble.csv"), {"metric", "value"}, rows);
        artifacts.push_back("manual_ensemble.csv");
    }
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<ScatterPoint> points;
        for (std::size_t i = 0; i < hpm_test.probs.size(); ++i) {
            rows.push_back({format_double(meta_raw_test(i, 0)), format_double(meta_raw_test(i, 1)),
                            std::to_string(hpm_test.labels[i])});
            points.push_back({meta_raw_test(i, 0), meta_raw_test(i, 1), hpm_test.labels[i]});
        }
        write_csv(artifact("fig5_meta_probs.csv"), {"p_hpm", "p_hrm", "label"}, rows);
        svg_scatter(artifact("fig5_scatter.svg"), "HPM vs HRM prediction probabilities", points,
                    "HPM probability", "HRM probability");
        artifacts.insert(artifacts.end(), {"fig5_meta_probs.csv", "fig5_scatter.svg"});
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("ensemble", secs, std::move(artifacts));
}

void Pipeline::explain() {
    if (!std::filesystem::exists(artifact("models/nnet.json")) ||
        !std::filesystem::exists(artifact("models/best_ml.json"))) {
        train();
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset& train_data = train_split();
    const Dataset& test_data = test_split("explain");
    std::vector<std::string> artifacts;

    LimeConfig lime = cfg_.explain.lime;
    lime.n_threads = cfg_.threads;

    const auto run_for = [&](const std::string& tag, const TrainedModel& model,
                             const std::string& fig_name) {
        const Dataset background = train_data.subset_features(model.feature_names());
        const Dataset test = test_data.subset_features(model.feature_names());

        std::vector<Explanation> instance_explanations;
        const AggregateImportance agg =
            aggregate_explanations(model, test, cfg_.explain.fraction, background, lime,
                                   derive_seed(cfg_.seed, 91), &instance_explanations);

        std::vector<std::vector<std::string>> rows;
        for (const auto& c : agg.cells) {
            rows.push_back({c.feature_name, format_double(c.bin_low), format_double(c.bin_high),
                            format_double(c.mean_weight), std::to_string(c.support)});
        }
        write_csv(artifact("lime_" + tag + "_aggregate.csv"),
                  {"feature", "bin_low", "bin_high", "mean_weight", "support"}, rows);

        std::vector<BarDatum> bars;
        const QuantileDiscretizer disc = quantile_discretizer(background.features, lime.n_bins);
        for (std::size_t i = 0; i < std::min<std::size_t>(agg.cells.size(),
                                                          static_cast<std::size_t>(lime.top_k));
             ++i) {
            const auto& c = agg.cells[i];
            std::size_t j = 0;
            while (background.feature_names[j] != c.feature_name) ++j;
            bars.push_back({disc.bin_condition(j, c.bin, c.feature_name), c.mean_weight});
        }
        svg_bar_chart(artifact(fig_name), "LIME mean feature weight (" + tag + ")", bars,
                      "mean signed weight");

        // per-instance explanations, one JSON object per line
        std::ofstream jsonl(artifact("lime_" + tag + "_instances.jsonl"), std::ios::binary);
        for (const Explanation& e : instance_explanations) {
            nlohmann::json j;
            j["instance_id"] = e.instance_id;
            j["intercept"] = e.local_intercept;
            j["r2"] = e.surrogate_r2;
            nlohmann::json entries = nlohmann::json::array();
            for (const auto& en : e.entries) {
                entries.push_back({{"feature", en.feature_name},
                                   {"condition", en.bin_condition},
                                   {"weight", en.weight}});
            }
            j["entries"] = std::move(entries);
            jsonl << j.dump() << '\n';
        }
        artifacts.insert(artifacts.end(), {"lime_" + tag + "_aggregate.csv", fig_name,
                                           "lime_" + tag + "_instances.jsonl"});
    };

    const auto best_ml = load_model(artifact("models/best_ml.json"));
    run_for("ml", *best_ml, "fig6_lime_ml.svg");
    const auto nnet = load_model(artifact("models/nnet.json"));
    run_for("nn", *nnet, "fig7_lime_nn.svg");

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("explain", secs, std::move(artifacts));
}

void Pipeline::report() {
    if (!std::filesystem::exists(artifact("table7_rows_train.csv"))) train();
    if (!std::filesystem::exists(artifact("table7_rows_ensemble.csv"))) ensemble();
    const auto t0 = std::chrono::steady_clock::now();

    const CsvTable train_rows = read_csv(artifact("table7_rows_train.csv"));
    const CsvTable ens_rows = read_csv(artifact("table7_rows_ensemble.csv"));

    // reference row order: baseline, ensembles, best ML, neural network
    std::vector<std::vector<std::string>> rows;
    rows.push_back(train_rows.rows[0]);
    rows.push_back(ens_rows.rows[0]);
    rows.push_back(ens_rows.rows[1]);
    rows.push_back(train_rows.rows[1]);
    rows.push_back(train_rows.rows[2]);
    write_csv(artifact("table7_summary.csv"), {"model", "f1", "precision", "recall"}, rows);

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_stage("report", secs, {"table7_summary.csv"});
}

void Pipeline::all() {
    if (!std::filesystem::exists(cfg_.dataset_path)) synth();
    stats();
    select();
    train();
    ensemble();
    explain();
    report();
}

}  // namespace hrv
