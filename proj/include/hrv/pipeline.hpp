#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrv/config.hpp"
#include "hrv/dataset.hpp"
#include "hrv/model.hpp"

namespace hrv {

/// Orchestrates the stages against one RunConfig. Stages exchange data only
/// through serialized artifacts under out_dir, so any command sequence is
/// equivalent to a single end-to-end run. Each command runs its missing
/// prerequisites first. A manifest (config hash, stage timings, artifact
/// paths, test-split access log) is merged into out_dir/manifest.json after
/// every command.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg);

    void synth();
    void stats();
    void select();
    void train();
    void ensemble();
    void explain();
    void report();
    void all();  // stats .. report (plus synth when the dataset file is absent)

    // split access, exposed for tests
    const Dataset& train_split();
    const Dataset& test_split(const std::string& purpose);  // purpose is logged
    const std::vector<std::string>& test_access_log() const { return test_access_; }

    std::filesystem::path artifact(const std::string& name) const;

private:
    const Dataset& full();
    const FeatureCatalog& catalog();
    void ensure_split();
    void run_stage(const std::string& name, void (Pipeline::*fn)());
    void record_stage(const std::string& name, double seconds,
                      std::vector<std::string> artifacts);
    void write_manifest();
    std::vector<std::string> feature_set(const std::string& method);

    RunConfig cfg_;
    std::optional<FeatureCatalog> catalog_;
    std::optional<Dataset> full_;
    std::optional<Dataset> train_;
    std::optional<Dataset> test_;
    std::vector<std::string> test_access_;
    std::map<std::string, std::pair<double, std::vector<std::string>>> stage_records_;
};

}  // namespace hrv
