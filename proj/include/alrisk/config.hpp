#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <alrisk/dataset.hpp>
#include <alrisk/experiment.hpp>

namespace alrisk {

//! Invalid configuration; `key` names the offending entry. Maps to CLI
//! exit code 1 (runtime failures map to 2).
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error("config key '" + key + "': " + message)
        , key_(std::move(key))
    {
    }

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

//! Flat dotted-key -> string map; the single config format. An ordered
//! map keeps manifests and error listings deterministic.
using FlatConfig = std::map<std::string, std::string>;

//! Built-in defaults for every recognized key.
inline FlatConfig default_config()
{
    return {
        { "dataset.path", "data/wbc.csv" },
        { "label_column", "diagnosis" },
        { "positive_label", "M" },
        { "drop_columns", "id" },
        { "test_fraction", "0.3" },
        { "warmup_size", "50" },
        { "seed", "1" },
        { "classifier.kind", "knn" },
        { "classifier.k", "5" },
        { "classifier.l2", "0.0001" },
        { "classifier.max_iter", "10000" },
        { "classifier.tol", "1e-06" },
        { "risk.grid_min_factor", "0.01" },
        { "risk.grid_max_factor", "100" },
        { "risk.grid_size", "16" },
        { "risk.loss_mode", "resubstitution" },
        { "strategy", "passive,uncertainty,local_risk_batch,survey" },
        { "batch_size", "20" },
        { "lambda", "0" },
        { "rounds", "10" },
        { "reps", "100" },
        { "workers", "0" },
        { "out_dir", "." },
    };
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            const std::string t = trim(cur);
            if (!t.empty())
                out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    const std::string t = trim(cur);
    if (!t.empty())
        out.push_back(t);
    return out;
}

inline void require_known_key(const std::string& key)
{
    static const FlatConfig known = default_config();
    if (!known.count(key))
        throw ConfigError(key, "unknown key");
}

template<typename T>
inline T parse_number(const FlatConfig& cfg, const std::string& key)
{
    const std::string& s = cfg.at(key);
    T v {};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(key, "cannot parse '" + s + "' as a number");
    return v;
}

} // namespace detail

//! Parses a `key = value` file: one entry per line, `#` starts a comment,
//! blank lines ignored. Unknown keys are rejected by name.
inline FlatConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open file '" + path + "'");
    FlatConfig out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string entry = detail::trim(line);
        if (entry.empty())
            continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config", "line " + std::to_string(line_no) + " of '" + path
                                            + "' is not of the form key = value");
        const std::string key = detail::trim(entry.substr(0, eq));
        const std::string value = detail::trim(entry.substr(eq + 1));
        detail::require_known_key(key);
        out[key] = value;
    }
    return out;
}

//! Materializes the effective configuration: built-in defaults, then the
//! ALRISK_SEED fallback, then the config file, then CLI overrides.
inline FlatConfig resolve_config(const FlatConfig& file_entries,
                                 const FlatConfig& cli_overrides)
{
    FlatConfig cfg = default_config();
    if (const char* env_seed = std::getenv("ALRISK_SEED"))
        cfg["seed"] = env_seed;
    for (const auto& [k, v] : file_entries) {
        detail::require_known_key(k);
        cfg[k] = v;
    }
    for (const auto& [k, v] : cli_overrides) {
        detail::require_known_key(k);
        cfg[k] = v;
    }
    return cfg;
}

//! Validates a resolved FlatConfig and builds the typed ExperimentConfig.
//! Throws ConfigError (naming the key) on any invalid entry.
inline ExperimentConfig build_experiment_config(const FlatConfig& cfg)
{
    ExperimentConfig out;

    out.test_fraction = detail::parse_number<double>(cfg, "test_fraction");
    if (!(out.test_fraction > 0.0 && out.test_fraction < 1.0))
        throw ConfigError("test_fraction", "must be in (0,1)");
    out.warmup_size = detail::parse_number<int>(cfg, "warmup_size");
    if (out.warmup_size < 0)
        throw ConfigError("warmup_size", "must be >= 0");

    const std::string kind = cfg.at("classifier.kind");
    if (kind == "knn")
        out.classifier.kind = ClassifierKind::knn;
    else if (kind == "logistic")
        out.classifier.kind = ClassifierKind::logistic;
    else
        throw ConfigError("classifier.kind", "'" + kind + "' is not one of knn, logistic");
    out.classifier.k = detail::parse_number<int>(cfg, "classifier.k");
    if (out.classifier.k < 1)
        throw ConfigError("classifier.k", "must be >= 1");
    out.classifier.l2 = detail::parse_number<double>(cfg, "classifier.l2");
    if (out.classifier.l2 < 0.0)
        throw ConfigError("classifier.l2", "must be >= 0");
    out.classifier.max_iter = detail::parse_number<int>(cfg, "classifier.max_iter");
    if (out.classifier.max_iter < 1)
        throw ConfigError("classifier.max_iter", "must be >= 1");
    out.classifier.tol = detail::parse_number<double>(cfg, "classifier.tol");
    if (!(out.classifier.tol > 0.0))
        throw ConfigError("classifier.tol", "must be > 0");

    out.risk.grid_min_factor = detail::parse_number<double>(cfg, "risk.grid_min_factor");
    out.risk.grid_max_factor = detail::parse_number<double>(cfg, "risk.grid_max_factor");
    out.risk.grid_size = detail::parse_number<int>(cfg, "risk.grid_size");
    if (!(out.risk.grid_min_factor > 0.0))
        throw ConfigError("risk.grid_min_factor", "must be > 0");
    if (out.risk.grid_size < 1)
        throw ConfigError("risk.grid_size", "must be >= 1");
    if (out.risk.grid_size > 1 && !(out.risk.grid_max_factor > out.risk.grid_min_factor))
        throw ConfigError("risk.grid_max_factor", "must exceed risk.grid_min_factor");
    const std::string mode = cfg.at("risk.loss_mode");
    if (mode == "resubstitution")
        out.risk.loss_mode = LossMode::resubstitution;
    else if (mode == "leave_one_out")
        out.risk.loss_mode = LossMode::leave_one_out;
    else
        throw ConfigError("risk.loss_mode",
                          "'" + mode + "' is not one of resubstitution, leave_one_out");
    if (out.risk.loss_mode == LossMode::leave_one_out
        && out.classifier.kind != ClassifierKind::knn)
        throw ConfigError("risk.loss_mode", "leave_one_out requires classifier.kind = knn");

    out.strategies.clear();
    for (const std::string& name : detail::split_list(cfg.at("strategy"))) {
        try {
            out.strategies.push_back(parse_strategy(name));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("strategy", e.what());
        }
    }
    if (out.strategies.empty())
        throw ConfigError("strategy", "list is empty");

    out.batch_size = detail::parse_number<int>(cfg, "batch_size");
    if (out.batch_size < 1)
        throw ConfigError("batch_size", "must be >= 1");
    out.rounds = detail::parse_number<int>(cfg, "rounds");
    if (out.rounds < 0)
        throw ConfigError("rounds", "must be >= 0");
    out.repetitions = detail::parse_number<int>(cfg, "reps");
    if (out.repetitions < 1)
        throw ConfigError("reps", "must be >= 1");
    out.base_seed = detail::parse_number<std::uint64_t>(cfg, "seed");
    out.lambda = detail::parse_number<double>(cfg, "lambda");
    if (out.lambda < 0.0)
        throw ConfigError("lambda", "must be >= 0");
    if (out.lambda > 0.0)
        throw ConfigError("lambda", "no variance estimator is available; only 0 is runnable");
    out.workers = detail::parse_number<int>(cfg, "workers");
    if (out.workers < 0)
        throw ConfigError("workers", "must be >= 0");

    return out;
}

//! Dataset-loading options from a resolved FlatConfig.
inline LoadOptions load_options_from(const FlatConfig& cfg)
{
    LoadOptions opts;
    opts.label_column = cfg.at("label_column");
    opts.positive_label = cfg.at("positive_label");
    opts.drop_columns = detail::split_list(cfg.at("drop_columns"));
    return opts;
}

//! Checks the label budget against the pool the dataset actually yields.
inline void validate_budget(const FlatConfig& cfg, const ExperimentConfig& ec, int n)
{
    const int nt = static_cast<int>(std::lround(n * ec.test_fraction));
    const int pool = n - nt - ec.warmup_size;
    if (ec.warmup_size + 1 > n - nt)
        throw ConfigError("warmup_size", "no unlabeled pool remains: " + cfg.at("warmup_size")
                                             + " warmup vs " + std::to_string(n - nt)
                                             + " non-test rows");
    if (ec.rounds * ec.batch_size > pool)
        throw ConfigError("rounds", "label budget rounds*batch_size = "
                                        + std::to_string(ec.rounds * ec.batch_size)
                                        + " exceeds the unlabeled pool of "
                                        + std::to_string(pool));
}

} // namespace alrisk
