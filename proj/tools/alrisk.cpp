#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <alrisk/alrisk.hpp>

namespace {

int cmd_run(const std::string& config_path, const alrisk::FlatConfig& cli_overrides)
{
    alrisk::FlatConfig file_entries;
    if (!config_path.empty()) {
        file_entries = alrisk::looks_like_manifest(config_path)
                           ? alrisk::read_manifest_config(config_path)
                           : alrisk::parse_config_file(config_path);
    }
    const alrisk::FlatConfig resolved = alrisk::resolve_config(file_entries, cli_overrides);
    alrisk::run_and_write(resolved, std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "alrisk: pool-based active learning with local-risk selection" };
    app.require_subcommand(1);
    app.set_version_flag("--version", ALRISK_VERSION);

    std::string config_path;
    std::string strategy, reps, batch_size, warmup, rounds, seed, workers, out_dir;
    CLI::App* run = app.add_subcommand("run", "run an experiment and write CSVs + manifest");
    run->add_option("--config", config_path, "config file (key = value) or a manifest.json");
    run->add_option("--strategy", strategy,
                    "comma list: passive, uncertainty, local_risk_batch, survey");
    run->add_option("--reps", reps, "number of repetitions");
    run->add_option("--batch-size", batch_size, "labels added per round");
    run->add_option("--warmup", warmup, "initial labeled-set size");
    run->add_option("--rounds", rounds, "selection rounds");
    run->add_option("--seed", seed, "base seed (also via ALRISK_SEED)");
    run->add_option("--workers", workers, "repetition worker threads (0 = auto)");
    run->add_option("--out-dir", out_dir, "output directory");

    std::string aggregate_csv, diff_csv, plot_out = "curves.svg";
    CLI::App* plot = app.add_subcommand("plot", "render learning curves from run CSVs");
    plot->add_option("--aggregate", aggregate_csv, "aggregate.csv from a run")->required();
    plot->add_option("--diff", diff_csv, "diff.csv from a run (optional)");
    plot->add_option("--out", plot_out, "output SVG path");

    CLI::App* selftest = app.add_subcommand("selftest", "run built-in oracle checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            alrisk::FlatConfig overrides;
            if (!strategy.empty())
                overrides["strategy"] = strategy;
            if (!reps.empty())
                overrides["reps"] = reps;
            if (!batch_size.empty())
                overrides["batch_size"] = batch_size;
            if (!warmup.empty())
                overrides["warmup_size"] = warmup;
            if (!rounds.empty())
                overrides["rounds"] = rounds;
            if (!seed.empty())
                overrides["seed"] = seed;
            if (!workers.empty())
                overrides["workers"] = workers;
            if (!out_dir.empty())
                overrides["out_dir"] = out_dir;
            return cmd_run(config_path, overrides);
        }
        if (plot->parsed()) {
            alrisk::plot_from_csvs(aggregate_csv, diff_csv, plot_out);
            std::cout << "alrisk: wrote " << plot_out << '\n';
            return 0;
        }
        if (selftest->parsed())
            return alrisk::run_selftest(std::cout);
    } catch (const alrisk::ConfigError& e) {
        std::cerr << "alrisk: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "alrisk: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
