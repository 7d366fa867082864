#include "app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace brainalign::app;

    CLI::App cli{"Layer-wise alignment of language model representations with brain activity"};
    cli.require_subcommand(1, 1);
    cli.set_version_flag("--version", kVersion);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool plots = false;
    for (const auto& name : subcommands()) {
        auto* sub = cli.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON parameter file");
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "random seed, overrides the config");
        sub->add_option("--threads", threads, "worker threads (default: BRAINALIGN_THREADS or all cores)");
        sub->add_flag("--plots", plots, "also write SVG plots");
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 1;
    }

    const auto* sub = cli.get_subcommands().front();
    RunConfig config;
    try {
        if (!config_path.empty())
            config = RunConfig::from_file(config_path);
    } catch (const brainalign::Error& e) {
        const char* kind = e.kind() == brainalign::ErrorClass::Io ? "io" : "config";
        std::cerr << nlohmann::json{{"error", {{"class", kind}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    config.out = out_dir;
    config.threads = threads;
    config.plots = plots;
    if (sub->count("--seed"))
        config.seed = seed;
    return run(sub->get_name(), config, std::cerr);
}
