#include "hrv/config.hpp"

#include <fstream>

#include <json.hpp>

#include "hrv/common.hpp"

namespace hrv {

namespace {

using nlohmann::json;

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail("config", std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail("config", std::string("malformed config: ") + e.what());
    }

    RunConfig cfg;
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        read_into(d, "path", cfg.dataset_path);
        read_into(d, "label_column", cfg.label_column);
        read_into(d, "catalog", cfg.catalog);
        read_into(d, "impute_median", cfg.impute_median);
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        read_into(s, "test_fraction", cfg.test_fraction);
        read_into(s, "seed", cfg.seed);
    }
    read_into(j, "threads", cfg.threads);
    read_into(j, "out_dir", cfg.out_dir);

    if (j.contains("stats")) {
        const auto& s = j.at("stats");
        read_into(s, "n_boot", cfg.stats.n_boot);
        read_into(s, "alpha", cfg.stats.alpha);
        read_into(s, "histogram_bins", cfg.stats.histogram_bins);
        read_into(s, "top_k", cfg.stats.top_k);
        read_into(s, "histogram_features", cfg.stats.histogram_features);
    }
    if (j.contains("select")) {
        const auto& s = j.at("select");
        if (s.contains("boruta")) {
            const auto& b = s.at("boruta");
            read_into(b, "n_trials", cfg.select.boruta.n_trials);
            read_into(b, "n_trees", cfg.select.boruta.n_trees);
            read_into(b, "max_depth", cfg.select.boruta.max_depth);
            read_into(b, "alpha_binomial", cfg.select.boruta.alpha_binomial);
        }
        if (s.contains("bootstrap")) {
            const auto& b = s.at("bootstrap");
            read_into(b, "alpha", cfg.select.bootstrap_alpha);
            read_into(b, "n_boot", cfg.select.bootstrap_n_boot);
        }
    }
    if (j.contains("learners")) {
        const auto& l = j.at("learners");
        if (l.contains("rf")) {
            const auto& r = l.at("rf");
            read_into(r, "n_trees", cfg.rf.n_trees);
            read_into(r, "max_depth", cfg.rf.max_depth);
            read_into(r, "min_samples_leaf", cfg.rf.min_samples_leaf);
            read_into(r, "features_per_split", cfg.rf.features_per_split);
        }
        if (l.contains("gbm")) {
            const auto& g = l.at("gbm");
            read_into(g, "n_estimators", cfg.gbm.n_estimators);
            read_into(g, "learning_rate", cfg.gbm.learning_rate);
            read_into(g, "max_depth", cfg.gbm.max_depth);
            read_into(g, "gamma", cfg.gbm.gamma);
            read_into(g, "reg_lambda", cfg.gbm.reg_lambda);
        }
    }
    if (j.contains("nnet")) {
        const auto& n = j.at("nnet");
        read_into(n, "hidden_layers", cfg.nnet.hidden_layers);
        read_into(n, "units", cfg.nnet.units);
        read_into(n, "dropout_rate", cfg.nnet.dropout_rate);
        read_into(n, "learning_rate", cfg.nnet.learning_rate);
        read_into(n, "batch_size", cfg.nnet.batch_size);
        read_into(n, "epochs", cfg.nnet.epochs);
        read_into(n, "batchnorm_momentum", cfg.nnet.batchnorm_momentum);
        read_into(n, "batchnorm_epsilon", cfg.nnet.batchnorm_epsilon);
        read_into(n, "val_fraction", cfg.nnet_val_fraction);
        read_into(n, "feature_set", cfg.nnet_feature_set);
    }
    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        read_into(m, "betas", cfg.betas);
        read_into(m, "val_fraction", cfg.meta_val_fraction);
    }
    if (j.contains("ensemble") && j.at("ensemble").contains("svm")) {
        const auto& s = j.at("ensemble").at("svm");
        read_into(s, "C", cfg.svm.C);
        read_into(s, "gamma", cfg.svm.gamma);
        read_into(s, "degree", cfg.svm.degree);
        read_into(s, "tolerance", cfg.svm.tolerance);
        read_into(s, "max_passes", cfg.svm.max_passes);
    }
    if (j.contains("explain")) {
        const auto& e = j.at("explain");
        read_into(e, "n_perturbations", cfg.explain.lime.n_perturbations);
        read_into(e, "kernel_width", cfg.explain.lime.kernel_width);
        read_into(e, "n_bins", cfg.explain.lime.n_bins);
        read_into(e, "top_k", cfg.explain.lime.top_k);
        read_into(e, "ridge_lambda", cfg.explain.lime.ridge_lambda);
        read_into(e, "fraction", cfg.explain.fraction);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        read_into(s, "n_rows", cfg.synth.n_rows);
        read_into(s, "n_informative", cfg.synth.n_informative);
        read_into(s, "n_noise", cfg.synth.n_noise);
        read_into(s, "class_balance", cfg.synth.class_balance);
        read_into(s, "shift", cfg.synth.shift);
        read_into(s, "seed", cfg.synth.seed);
    }

    for (double b : cfg.betas) {
        if (!(b > 0.0)) fail("config", "betas must be positive");
    }
    if (cfg.catalog != "hrv" && cfg.catalog != "from_header") {
        fail("config", "dataset.catalog must be 'hrv' or 'from_header'");
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("io", "cannot open config '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

std::string canonical_config(const RunConfig& cfg) {
    json j;
    j["dataset"] = {{"path", cfg.dataset_path},
                    {"label_column", cfg.label_column},
                    {"catalog", cfg.catalog},
                    {"impute_median", cfg.impute_median}};
    j["split"] = {{"test_fraction", cfg.test_fraction}, {"seed", cfg.seed}};
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir;
    j["stats"] = {{"n_boot", cfg.stats.n_boot},
                  {"alpha", cfg.stats.alpha},
                  {"histogram_bins", cfg.stats.histogram_bins},
                  {"top_k", cfg.stats.top_k},
                  {"histogram_features", cfg.stats.histogram_features}};
    j["select"] = {{"boruta",
                    {{"n_trials", cfg.select.boruta.n_trials},
                     {"n_trees", cfg.select.boruta.n_trees},
                     {"max_depth", cfg.select.boruta.max_depth},
                     {"alpha_binomial", cfg.select.boruta.alpha_binomial}}},
                   {"bootstrap",
                    {{"alpha", cfg.select.bootstrap_alpha},
                     {"n_boot", cfg.select.bootstrap_n_boot}}}};
    j["learners"] = {{"rf",
                      {{"n_trees", cfg.rf.n_trees},
                       {"max_depth", cfg.rf.max_depth},
                       {"min_samples_leaf", cfg.rf.min_samples_leaf},
                       {"features_per_split", cfg.rf.features_per_split}}},
                     {"gbm",
                      {{"n_estimators", cfg.gbm.n_estimators},
                       {"learning_rate", cfg.gbm.learning_rate},
                       {"max_depth", cfg.gbm.max_depth},
                       {"gamma", cfg.gbm.gamma},
                       {"reg_lambda", cfg.gbm.reg_lambda}}}};
    j["nnet"] = {{"hidden_layers", cfg.nnet.hidden_layers},
                 {"units", cfg.nnet.units},
                 {"dropout_rate", cfg.nnet.dropout_rate},
                 {"learning_rate", cfg.nnet.learning_rate},
                 {"batch_size", cfg.nnet.batch_size},
                 {"epochs", cfg.nnet.epochs},
                 {"batchnorm_momentum", cfg.nnet.batchnorm_momentum},
                 {"batchnorm_epsilon", cfg.nnet.batchnorm_epsilon},
                 {"val_fraction", cfg.nnet_val_fraction},
                 {"feature_set", cfg.nnet_feature_set}};
    j["metrics"] = {{"betas", cfg.betas}, {"val_fraction", cfg.meta_val_fraction}};
    j["ensemble"] = {{"svm",
                      {{"C", cfg.svm.C},
                       {"gamma", cfg.svm.gamma},
                       {"degree", cfg.svm.degree},
                       {"tolerance", cfg.svm.tolerance},
                       {"max_passes", cfg.svm.max_passes}}}};
    j["explain"] = {{"n_perturbations", cfg.explain.lime.n_perturbations},
                    {"kernel_width", cfg.explain.lime.kernel_width},
                    {"n_bins", cfg.explain.lime.n_bins},
                    {"top_k", cfg.explain.lime.top_k},
                    {"ridge_lambda", cfg.explain.lime.ridge_lambda},
                    {"fraction", cfg.explain.fraction}};
    j["synth"] = {{"n_rows", cfg.synth.n_rows},
                  {"n_informative", cfg.synth.n_informative},
                  {"n_noise", cfg.synth.n_noise},
                  {"class_balance", cfg.synth.class_balance},
                  {"shift", cfg.synth.shift},
                  {"seed", cfg.synth.seed}};
    return j.dump();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // FNV-1a 64
    const std::string s = canonical_config(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace hrv
