#pragma once

// Runs every subcommand on a small simulated study and collects the bytes of
// everything written. Shared by the CLI tests and the acceptance binary.

#include "app.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testing {

using Files = std::map<std::string, std::string>;

inline Files slurp_tree(const std::filesystem::path& root)
{
    Files files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file())
            continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[std::filesystem::relative(e.path(), root).generic_string()] = ss.str();
    }
    return files;
}

inline void run_or_throw(const std::string& command, const nlohmann::json& params, const std::filesystem::path& root,
                         const std::string& out, unsigned threads)
{
    brainalign::app::RunConfig cfg;
    cfg.params = params;
    cfg.base_dir = root;
    cfg.out = root / out;
    cfg.threads = threads;
    cfg.plots = true;
    std::ostringstream err;
    if (brainalign::app::run(command, cfg, err) != 0)
        throw std::runtime_error(command + " failed: " + err.str());
}

/// Every subcommand once, in dependency order, under `root`.
inline void run_pipeline(const std::filesystem::path& root, unsigned threads)
{
    using nlohmann::json;
    run_or_throw("simulate",
                 {{"subjects", 5}, {"rois", 24}, {"layers", 3}, {"trs_per_run", 40}, {"tokens", true}, {"seed", 11},
                  {"signal_rois", {0, 1, 2, 3, 4, 5}}},
                 root, "sim", threads);
    run_or_throw("simulate",
                 {{"subjects", 5}, {"rois", 24}, {"layers", 2}, {"trs_per_run", 40}, {"tokens", true}, {"seed", 12},
                  {"three_languages", {{"shared", {0, 1, 2}}, {"private", {{3}, {4, 5}, json::array()}}}}},
                 root, "sim3", threads);
    run_or_throw("design", {{"manifest", "sim/manifest.json"}, {"layers", {1, 2}}}, root, "design", threads);
    run_or_throw("encode", {{"manifest", "sim/manifest.json"}}, root, "enc", threads);
    for (const char* lang : {"sim-1", "sim-2", "sim-3"})
        run_or_throw("encode", {{"manifest", std::string("sim3/") + lang + "/manifest.json"}, {"layers", {1}}}, root,
                     std::string("enc_") + lang, threads);
    run_or_throw("group-map", {{"scores", "enc/scores"}}, root, "gm", threads);
    run_or_throw("layer-compare", {{"scores", "enc/scores"}, {"n_perm", 500}, {"permutation_mode", "monte-carlo"}},
                 root, "lc", threads);
    run_or_throw("model-compare",
                 {{"scores_a", "enc/scores"}, {"scores_b", "enc/scores"}, {"layer_a", 1}, {"layer_b", 3}}, root, "mc",
                 threads);
    const json three = {"enc_sim-1/scores", "enc_sim-2/scores", "enc_sim-3/scores"};
    run_or_throw("overlap", {{"scores", three}, {"layer", 1}}, root, "ov", threads);
    run_or_throw("preferred-layer", {{"scores", "enc/scores"}}, root, "pl", threads);
    run_or_throw("networks", {{"scores", "enc/scores"}, {"atlas", "sim/atlas.csv"}}, root, "nw", threads);
    run_or_throw("convergence", {{"scores", three}}, root, "cv", threads);
    run_or_throw("id", {{"manifest", "sim/manifest.json"}, {"max_points", 200}}, root, "id", threads);
    run_or_throw("surprisal",
                 {{"manifests", {"sim3/sim-1/manifest.json", "sim3/sim-2/manifest.json", "sim3/sim-3/manifest.json"}}},
                 root, "su", threads);
    run_or_throw("report", {{"inputs", {"gm", "lc", "mc", "ov", "pl", "nw", "cv", "id", "su"}}}, root, "rp", threads);
}

} // namespace testing
