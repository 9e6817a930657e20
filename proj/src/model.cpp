#include "hrv/model.hpp"

#include <fstream>

#include <json.hpp>

#include "hrv/common.hpp"

namespace hrv {

namespace {

using nlohmann::json;

json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.value = n.at(4).get<double>();
        t.nodes.push_back(node);
    }
    return t;
}

json forest_to_json(const ForestModel& m) {
    json j;
    j["config"] = {{"n_trees", m.config.n_trees},
                   {"max_depth", m.config.max_depth},
                   {"min_samples_leaf", m.config.min_samples_leaf},
                   {"features_per_split", m.config.features_per_split},
                   {"weight_negative", m.config.class_weights.weight_negative},
                   {"weight_positive", m.config.class_weights.weight_positive},
                   {"seed", m.config.seed}};
    j["importances"] = m.importances;
    j["feature_names"] = m.feature_names;
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    return j;
}

ForestModel forest_from_json(const json& j) {
    ForestModel m;
    const auto& c = j.at("config");
    m.config.n_trees = c.at("n_trees").get<int>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    m.config.features_per_split = c.at("features_per_split").get<int>();
    m.config.class_weights.weight_negative = c.at("weight_negative").get<double>();
    m.config.class_weights.weight_positive = c.at("weight_positive").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.importances = j.at("importances").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    return m;
}

json gbm_to_json(const GbmModel& m) {
    json j;
    j["config"] = {{"n_estimators", m.config.n_estimators},
                   {"learning_rate", m.config.learning_rate},
                   {"max_depth", m.config.max_depth},
                   {"gamma", m.config.gamma},
                   {"reg_lambda", m.config.reg_lambda},
                   {"weight_negative", m.config.class_weights.weight_negative},
                   {"weight_positive", m.config.class_weights.weight_positive},
                   {"seed", m.config.seed}};
    j["base_score"] = m.base_score;
    j["importances"] = m.importances;
    j["feature_names"] = m.feature_names;
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    return j;
}

GbmModel gbm_from_json(const json& j) {
    GbmModel m;
    const auto& c = j.at("config");
    m.config.n_estimators = c.at("n_estimators").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.gamma = c.at("gamma").get<double>();
    m.config.reg_lambda = c.at("reg_lambda").get<double>();
    m.config.class_weights.weight_negative = c.at("weight_negative").get<double>();
    m.config.class_weights.weight_positive = c.at("weight_positive").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.base_score = j.at("base_score").get<double>();
    m.importances = j.at("importances").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    return m;
}

json mlp_to_json(const MlpPredictor& p) {
    const MlpModel& m = p.model();
    json j;
    j["config"] = {{"hidden_layers", m.config.hidden_layers},
                   {"units", m.config.units},
                   {"dropout_rate", m.config.dropout_rate},
                   {"learning_rate", m.config.learning_rate},
                   {"batch_size", m.config.batch_size},
                   {"epochs", m.config.epochs},
                   {"weight_negative", m.config.class_weights.weight_negative},
                   {"weight_positive", m.config.class_weights.weight_positive},
                   {"seed", m.config.seed},
                   {"batchnorm_momentum", m.config.batchnorm_momentum},
                   {"batchnorm_epsilon", m.config.batchnorm_epsilon}};
    j["n_features"] = m.n_features;
    json layers = json::array();
    for (const auto& layer : m.layers) {
        layers.push_back({{"rows", layer.W.rows},
                          {"cols", layer.W.cols},
                          {"W", layer.W.data},
                          {"b", layer.b},
                          {"gamma", layer.gamma},
                          {"beta", layer.beta},
                          {"run_mean", layer.run_mean},
                          {"run_var", layer.run_var}});
    }
    j["layers"] = std::move(layers);
    j["out_w"] = m.out_w;
    j["out_b"] = m.out_b;
    j["scaler_mean"] = p.scaler().mean;
    j["scaler_stddev"] = p.scaler().stddev;
    j["feature_names"] = p.feature_names();
    return j;
}

std::unique_ptr<TrainedModel> mlp_from_json(const json& j) {
    MlpModel m;
    const auto& c = j.at("config");
    m.config.hidden_layers = c.at("hidden_layers").get<int>();
    m.config.units = c.at("units").get<int>();
    m.config.dropout_rate = c.at("dropout_rate").get<double>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.class_weights.weight_negative = c.at("weight_negative").get<double>();
    m.config.class_weights.weight_positive = c.at("weight_positive").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.batchnorm_momentum = c.at("batchnorm_momentum").get<double>();
    m.config.batchnorm_epsilon = c.at("batchnorm_epsilon").get<double>();
    m.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
        MlpModel::Layer layer;
        layer.W.rows = lj.at("rows").get<std::size_t>();
        layer.W.cols = lj.at("cols").get<std::size_t>();
        layer.W.data = lj.at("W").get<std::vector<double>>();
        layer.b = lj.at("b").get<std::vector<double>>();
        layer.gamma = lj.at("gamma").get<std::vector<double>>();
        layer.beta = lj.at("beta").get<std::vector<double>>();
        layer.run_mean = lj.at("run_mean").get<std::vector<double>>();
        layer.run_var = lj.at("run_var").get<std::vector<double>>();
        m.layers.push_back(std::move(layer));
    }
    m.out_w = j.at("out_w").get<std::vector<double>>();
    m.out_b = j.at("out_b").get<double>();
    Standardizer s;
    s.mean = j.at("scaler_mean").get<std::vector<double>>();
    s.stddev = j.at("scaler_stddev").get<std::vector<double>>();
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    return std::make_unique<MlpPredictor>(std::move(m), std::move(s), std::move(names));
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json j;
    j["format_version"] = 1;
    j["kind"] = model.kind();
    if (model.kind() == "forest") {
        j["model"] = forest_to_json(static_cast<const ForestPredictor&>(model).model());
    } else if (model.kind() == "gbm") {
        j["model"] = gbm_to_json(static_cast<const GbmPredictor&>(model).model());
    } else if (model.kind() == "mlp") {
        j["model"] = mlp_to_json(static_cast<const MlpPredictor&>(model));
    } else {
        fail("internal", "cannot serialize model kind '" + model.kind() + "'");
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot write '" + path.string() + "'");
    out << j.dump();
}

std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("io", "cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("data", "malformed model file '" + path.string() + "': " + e.what());
    }
    if (j.at("format_version").get<int>() != 1) {
        fail("data", "unsupported model format version in '" + path.string() + "'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "forest") return std::make_unique<ForestPredictor>(forest_from_json(j.at("model")));
    if (kind == "gbm") return std::make_unique<GbmPredictor>(gbm_from_json(j.at("model")));
    if (kind == "mlp") return mlp_from_json(j.at("model"));
    fail("data", "unknown model kind '" + kind + "'");
}

}  // namespace hrv
