#include "app.hpp"

#include "brainalign/io.hpp"

#include <cstdio>
#include <system_error>

namespace brainalign::app {

RunConfig RunConfig::from_file(const fs::path& path)
{
    RunConfig config;
    try {
        config.params = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (!config.params.is_object())
        throw ConfigError("config " + path.string() + ": top level must be an object");
    config.base_dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    return config;
}

Params::Params(const nlohmann::json& j, fs::path base_dir) : json_(j), base_(std::move(base_dir))
{
    if (!json_.is_object())
        throw ConfigError("config must be a JSON object");
}

fs::path Params::path(const std::string& key)
{
    const fs::path p = require<std::string>(key);
    return p.is_absolute() ? p : base_ / p;
}

std::vector<fs::path> Params::paths(const std::string& key)
{
    std::vector<fs::path> out;
    for (const auto& s : require<std::vector<std::string>>(key)) {
        const fs::path p = s;
        out.push_back(p.is_absolute() ? p : base_ / p);
    }
    return out;
}

const nlohmann::json& Params::raw(const std::string& key)
{
    used_.insert(key);
    if (!json_.contains(key))
        throw ConfigError("missing required parameter '" + key + "'");
    return json_.at(key);
}

void Params::finish() const
{
    for (const auto& [key, value] : json_.items())
        if (!used_.count(key))
            throw ConfigError("unknown parameter '" + key + "'");
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::uint64_t resolve_seed(const RunConfig& config, Params& params)
{
    const auto from_params = params.get<std::uint64_t>("seed", 0);
    return config.seed.value_or(from_params);
}

} // namespace

Context::Context(const RunConfig& config, Params& p, std::string name)
    : params(p),
      out(config.out),
      threads(config.threads ? config.threads : default_threads()),
      plots(config.plots),
      seed(resolve_seed(config, p)),
      subcommand(std::move(name)),
      base_(config.base_dir)
{
}

fs::path Context::write(const std::string& relative, std::string_view contents)
{
    const fs::path file = out / relative;
    io::write_file(file, contents);
    artifacts_[relative] = fnv1a_hex(contents);
    return file;
}

void Context::record(const fs::path& file)
{
    artifacts_[fs::relative(file, out).generic_string()] = fnv1a_hex(io::read_file(file));
}

// Keyed relative to the config directory so a copied study hashes the same.
void Context::input(const fs::path& file)
{
    const fs::path rel = file.lexically_normal().lexically_relative(base_.lexically_normal());
    const bool inside = !rel.empty() && *rel.begin() != "..";
    inputs_[(inside ? rel : file).generic_string()] = fnv1a_hex(io::read_file(file));
}

std::string Context::provenance(const std::string& config_hash) const
{
    nlohmann::json j;
    j["tool"] = "brainalign";
    j["version"] = kVersion;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    j["subcommand"] = subcommand;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["inputs"] = inputs_;
    j["artifacts"] = artifacts_;
    return j.dump(2) + "\n";
}

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, fn] : command_table())
            v.push_back(name);
        return v;
    }();
    return names;
}

const std::map<std::string, Command>& command_table()
{
    static const std::map<std::string, Command> table{
        {"simulate", cmd_simulate},
        {"design", cmd_design},
        {"encode", cmd_encode},
        {"group-map", cmd_group_map},
        {"layer-compare", cmd_layer_compare},
        {"model-compare", cmd_model_compare},
        {"overlap", cmd_overlap},
        {"preferred-layer", cmd_preferred_layer},
        {"networks", cmd_networks},
        {"convergence", cmd_convergence},
        {"id", cmd_id},
        {"surprisal", cmd_surprisal},
        {"report", cmd_report},
    };
    return table;
}

namespace {

// Single instance per output directory.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) : path_(dir / ".brainalign.lock")
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f)
            throw IoError("output directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
        std::fclose(f);
    }
    ~DirectoryLock()
    {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    fs::path path_;
};

int report_error(std::ostream& err, std::string_view subcommand, std::string_view kind, const std::string& message)
{
    nlohmann::json j;
    j["error"] = {{"class", kind}, {"subcommand", subcommand}, {"message", message}};
    err << j.dump() << "\n";
    return kind == "internal" ? 2 : 1;
}

std::string_view class_name(ErrorClass kind)
{
    switch (kind) {
    case ErrorClass::Config:
        return "config";
    case ErrorClass::Io:
        return "io";
    case ErrorClass::Numeric:
        return "numeric";
    }
    return "internal";
}

} // namespace

int run(std::string_view subcommand, const RunConfig& config, std::ostream& err)
{
    try {
        const auto it = command_table().find(std::string(subcommand));
        if (it == command_table().end())
            throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'");
        if (config.out.empty())
            throw ConfigError("an output directory is required");

        DirectoryLock lock(config.out);
        Params params(config.params, config.base_dir);
        Context ctx(config, params, it->first);
        nlohmann::json effective = config.params;
        effective["seed"] = ctx.seed;
        const std::string config_hash = fnv1a_hex(effective.dump());

        it->second(ctx);
        params.finish();
        io::write_file(config.out / "provenance.json", ctx.provenance(config_hash));
        return 0;
    } catch (const Error& e) {
        return report_error(err, subcommand, class_name(e.kind()), e.what());
    } catch (const std::invalid_argument& e) {
        return report_error(err, subcommand, "config", e.what());
    } catch (const nlohmann::json::exception& e) {
        return report_error(err, subcommand, "config", e.what());
    } catch (const fs::filesystem_error& e) {
        return report_error(err, subcommand, "io", e.what());
    } catch (const std::exception& e) {
        return report_error(err, subcommand, "internal", e.what());
    }
}

} // namespace brainalign::app
