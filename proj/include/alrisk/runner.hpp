#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <alrisk/config.hpp>
#include <alrisk/experiment.hpp>
#include <alrisk/manifest.hpp>

namespace alrisk {

struct RunPaths
{
    std::string raw;
    std::string aggregate;
    std::string diff;
    std::string manifest;
};

//! End-to-end run from a resolved FlatConfig: load + standardize the
//! dataset, execute the experiment, write the three CSVs and the
//! manifest into out_dir. Shared by the CLI and the test suite so both
//! exercise the same write path.
inline RunPaths run_and_write(const FlatConfig& resolved, std::ostream& log)
{
    const ExperimentConfig ec = build_experiment_config(resolved);

    const std::string dataset_path = resolved.at("dataset.path");
    Dataset ds;
    try {
        ds = load_csv(dataset_path, load_options_from(resolved));
    } catch (const std::runtime_error& e) {
        throw ConfigError("dataset.path", e.what());
    }
    validate_budget(resolved, ec, ds.n());
    ds = standardize(ds);

    const std::filesystem::path dir = resolved.at("out_dir");
    std::filesystem::create_directories(dir);
    RunPaths paths;
    paths.raw = (dir / "raw.csv").string();
    paths.aggregate = (dir / "aggregate.csv").string();
    paths.diff = (dir / "diff.csv").string();
    paths.manifest = (dir / "manifest.json").string();

    RunManifest manifest;
    manifest.base_seed = ec.base_seed;
    manifest.config = resolved;
    manifest.raw_path = paths.raw;
    manifest.aggregate_path = paths.aggregate;
    manifest.diff_path = paths.diff;
    manifest.started_at = detail::utc_timestamp();

    log << "alrisk: dataset '" << dataset_path << "' (" << ds.n() << " rows, " << ds.dim()
        << " features), " << ec.strategies.size() << " strategies, " << ec.repetitions
        << " repetitions\n";

    const ExperimentResult result = run_experiment(ds, ec);
    if (result.truncated)
        log << "alrisk: warning: pool exhausted before the configured rounds; "
               "curves truncated\n";

    write_raw_csv(result, paths.raw);
    write_aggregate_csv(result, paths.aggregate);
    write_diff_csv(result, paths.diff);
    manifest.finished_at = detail::utc_timestamp();
    write_manifest(manifest, paths.manifest);

    log << "alrisk: wrote " << paths.raw << ", " << paths.aggregate << ", " << paths.diff
        << ", " << paths.manifest << '\n';
    return paths;
}

} // namespace alrisk
