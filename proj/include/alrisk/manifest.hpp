#pragma once

#include <ctime>
#include <fstream>
#include <string>

#include <json.hpp>

#include <alrisk/config.hpp>

#ifndef ALRISK_VERSION
#define ALRISK_VERSION "0.0.0"
#endif

namespace alrisk {

//! Everything needed to reproduce a run: the fully resolved config plus
//! bookkeeping. Re-running with the manifest as the config file yields
//! byte-identical CSVs (timestamps in the manifest itself differ).
struct RunManifest
{
    std::string tool_version = ALRISK_VERSION;
    std::uint64_t base_seed = 0;
    std::string started_at;
    std::string finished_at;
    std::string raw_path;
    std::string aggregate_path;
    std::string diff_path;
    FlatConfig config;
};

namespace detail {

inline std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc {};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace detail

inline void write_manifest(const RunManifest& m, const std::string& path)
{
    nlohmann::json j;
    j["tool_version"] = m.tool_version;
    j["base_seed"] = m.base_seed;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["outputs"] = { { "raw", m.raw_path },
                     { "aggregate", m.aggregate_path },
                     { "diff", m.diff_path } };
    j["config"] = nlohmann::json::object();
    for (const auto& [k, v] : m.config)
        j["config"][k] = v;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

//! Extracts the resolved config map from a manifest file.
inline FlatConfig read_manifest_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", "cannot parse manifest '" + path + "': " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object())
        throw ConfigError("config", "manifest '" + path + "' has no config object");
    FlatConfig cfg;
    for (const auto& [k, v] : j["config"].items()) {
        detail::require_known_key(k);
        if (!v.is_string())
            throw ConfigError(k, "manifest values must be strings");
        cfg[k] = v.get<std::string>();
    }
    return cfg;
}

//! True if the file looks like a JSON manifest rather than a flat
//! key = value config (first non-whitespace byte is '{').
inline bool looks_like_manifest(const std::string& path)
{
    std::ifstream in(path);
    char c = 0;
    while (in.get(c))
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
            return c == '{';
    return false;
}

} // namespace alrisk
