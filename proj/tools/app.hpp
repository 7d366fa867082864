#pragma once

// In-process entry point of the command line tool. Tests call run() directly;
// main() only parses flags.

#include "brainalign/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace brainalign::app {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    nlohmann::json params = nlohmann::json::object();
    fs::path base_dir = ".";           ///< relative paths in params resolve here
    fs::path out;
    std::optional<std::uint64_t> seed; ///< overrides params["seed"]
    unsigned threads = 0;              ///< 0: default_threads()
    bool plots = false;

    /// Reads a JSON config file; its directory becomes base_dir.
    static RunConfig from_file(const fs::path& path);
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand. Returns 0 on success, 1 for config, I/O and numeric
/// errors, 2 for anything else; failures are reported on `err` as one JSON
/// object.
int run(std::string_view subcommand, const RunConfig& config, std::ostream& err);

/// Typed access to the parameter object. Every key must be consumed, so a
/// misspelled option is an error rather than a silent default.
class Params {
public:
    Params(const nlohmann::json& j, fs::path base_dir);

    bool has(const std::string& key) const { return json_.contains(key); }

    template <typename T>
    T get(const std::string& key, T fallback)
    {
        used_.insert(key);
        if (!json_.contains(key) || json_.at(key).is_null())
            return fallback;
        return convert<T>(key);
    }

    template <typename T>
    T require(const std::string& key)
    {
        used_.insert(key);
        if (!json_.contains(key))
            throw ConfigError("missing required parameter '" + key + "'");
        return convert<T>(key);
    }

    fs::path path(const std::string& key);
    std::vector<fs::path> paths(const std::string& key);
    const nlohmann::json& raw(const std::string& key);

    /// Throws on keys nobody asked for.
    void finish() const;

private:
    template <typename T>
    T convert(const std::string& key) const
    {
        try {
            return json_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("parameter '" + key + "' has the wrong type");
        }
    }

    nlohmann::json json_;
    fs::path base_;
    std::set<std::string> used_;
};

/// Everything a subcommand may touch. Artifacts must be written through
/// write() so they are hashed into the provenance record.
class Context {
public:
    Context(const RunConfig& config, Params& params, std::string subcommand);

    Params& params;
    const fs::path out;
    const unsigned threads;
    const bool plots;
    const std::uint64_t seed;
    const std::string subcommand;

    fs::path write(const std::string& relative, std::string_view contents);
    /// Registers a file written by a library routine.
    void record(const fs::path& file);
    void input(const fs::path& file);

    std::string provenance(const std::string& config_hash) const;

private:
    std::map<std::string, std::string> artifacts_;
    std::map<std::string, std::string> inputs_;
    fs::path base_;
};

std::string fnv1a_hex(std::string_view bytes);

using Command = std::function<void(Context&)>;
const std::map<std::string, Command>& command_table();

// Individual subcommands, defined in commands.cpp and report.cpp.
void cmd_simulate(Context& ctx);
void cmd_design(Context& ctx);
void cmd_encode(Context& ctx);
void cmd_group_map(Context& ctx);
void cmd_layer_compare(Context& ctx);
void cmd_model_compare(Context& ctx);
void cmd_overlap(Context& ctx);
void cmd_preferred_layer(Context& ctx);
void cmd_networks(Context& ctx);
void cmd_convergence(Context& ctx);
void cmd_id(Context& ctx);
void cmd_surprisal(Context& ctx);
void cmd_report(Context& ctx);

} // namespace brainalign::app
