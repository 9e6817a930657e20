#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrv/dataset.hpp"
#include "hrv/forest.hpp"
#include "hrv/gbm.hpp"
#include "hrv/matrix.hpp"
#include "hrv/nnet.hpp"

namespace hrv {

/// Read-only fitted classifier: probability prediction plus optional
/// feature importances. Implementations are immutable and thread-safe.
class TrainedModel {
public:
    virtual ~TrainedModel() = default;
    virtual std::vector<double> predict_proba(const Matrix& features) const = 0;
    virtual std::optional<std::vector<double>> importances() const { return std::nullopt; }
    virtual std::string kind() const = 0;
    virtual const std::vector<std::string>& feature_names() const = 0;
};

class ForestPredictor : public TrainedModel {
public:
    explicit ForestPredictor(ForestModel m) : model_(std::move(m)) {}
    std::vector<double> predict_proba(const Matrix& f) const override { return model_.predict_proba(f); }
    std::optional<std::vector<double>> importances() const override { return model_.importances; }
    std::string kind() const override { return "forest"; }
    const std::vector<std::string>& feature_names() const override { return model_.feature_names; }
    const ForestModel& model() const { return model_; }

private:
    ForestModel model_;
};

class GbmPredictor : public TrainedModel {
public:
    explicit GbmPredictor(GbmModel m) : model_(std::move(m)) {}
    std::vector<double> predict_proba(const Matrix& f) const override { return model_.predict_proba(f); }
    std::optional<std::vector<double>> importances() const override { return model_.importances; }
    std::string kind() const override { return "gbm"; }
    const std::vector<std::string>& feature_names() const override { return model_.feature_names; }
    const GbmModel& model() const { return model_; }

private:
    GbmModel model_;
};

/// MLP plus the standardizer it was trained behind; accepts raw features.
class MlpPredictor : public TrainedModel {
public:
    MlpPredictor(MlpModel m, Standardizer s, std::vector<std::string> names)
        : model_(std::move(m)), scaler_(std::move(s)), names_(std::move(names)) {}
    std::vector<double> predict_proba(const Matrix& f) const override {
        return forward(model_, apply_standardizer(scaler_, f), ForwardMode::inference);
    }
    std::string kind() const override { return "mlp"; }
    const std::vector<std::string>& feature_names() const override { return names_; }
    const MlpModel& model() const { return model_; }
    const Standardizer& scaler() const { return scaler_; }

private:
    MlpModel model_;
    Standardizer scaler_;
    std::vector<std::string> names_;
};

/// Self-describing versioned JSON checkpoint (format_version 1).
void save_model(const TrainedModel& model, const std::filesystem::path& path);
std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path);

}  // namespace hrv
