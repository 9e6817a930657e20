#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hrv/common.hpp"
#include "hrv/config.hpp"
#include "hrv/pipeline.hpp"

namespace {

int exit_code_for(const std::string& category) {
    if (category == "config") return 1;
    if (category == "io") return 2;
    if (category == "data") return 3;
    if (category == "train") return 4;
    return 5;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HRV sepsis classification pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // options may follow the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_override;
    app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
    app.add_option("--seed", seed_override, "override split.seed");
    app.add_option("--out", out_override, "override out_dir");

    const char* commands[] = {"stats", "select", "train", "ensemble", "explain",
                              "report", "synth", "all"};
    for (const char* c : commands) app.add_subcommand(c);

    CLI11_PARSE(app, argc, argv);

    try {
        hrv::RunConfig cfg =
            config_path.empty() ? hrv::RunConfig{} : hrv::load_run_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (!out_override.empty()) cfg.out_dir = out_override;

        hrv::Pipeline pipeline(cfg);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "stats") pipeline.stats();
        else if (cmd == "select") pipeline.select();
        else if (cmd == "train") pipeline.train();
        else if (cmd == "ensemble") pipeline.ensemble();
        else if (cmd == "explain") pipeline.explain();
        else if (cmd == "report") pipeline.report();
        else if (cmd == "synth") pipeline.synth();
        else if (cmd == "all") pipeline.all();
        return 0;
    } catch (const hrv::Error& e) {
        std::fprintf(stderr, "error:%s: %s\n", e.category().c_str(), e.what());
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error:internal: %s\n", e.what());
        return 5;
    }
}
