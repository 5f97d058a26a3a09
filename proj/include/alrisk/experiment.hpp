#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <alrisk/classifier.hpp>
#include <alrisk/dataset.hpp>
#include <alrisk/local_risk.hpp>
#include <alrisk/selection.hpp>

namespace alrisk {

enum class Strategy { passive, uncertainty, local_risk_batch, survey };

inline const std::vector<std::pair<Strategy, std::string>>& strategy_names()
{
    static const std::vector<std::pair<Strategy, std::string>> names = {
        { Strategy::passive, "passive" },
        { Strategy::uncertainty, "uncertainty" },
        { Strategy::local_risk_batch, "local_risk_batch" },
        { Strategy::survey, "survey" },
    };
    return names;
}

inline std::string strategy_name(Strategy s)
{
    for (const auto& [st, name] : strategy_names())
        if (st == s)
            return name;
    return "unknown";
}

inline Strategy parse_strategy(const std::string& s)
{
    for (const auto& [st, name] : strategy_names())
        if (name == s)
            return st;
    std::string valid;
    for (const auto& [st, name] : strategy_names())
        valid += (valid.empty() ? "" : ", ") + name;
    throw std::invalid_argument("unknown strategy '" + s + "' (valid: " + valid + ")");
}

//! Risk-estimator settings: grid factors are multiples of the median
//! pairwise squared distance of the labeled set.
struct RiskConfig
{
    double grid_min_factor = 1e-2;
    double grid_max_factor = 1e2;
    int grid_size = 16;
    LossMode loss_mode = LossMode::resubstitution;
};

//! Full protocol description for one experiment.
struct ExperimentConfig
{
    double test_fraction = 0.3;
    int warmup_size = 50;
    ClassifierConfig classifier;
    RiskConfig risk;
    std::vector<Strategy> strategies = { Strategy::passive, Strategy::uncertainty,
                                         Strategy::local_risk_batch, Strategy::survey };
    int batch_size = 20;
    int rounds = 10;
    int repetitions = 100;
    std::uint64_t base_seed = 1;
    double lambda = 0.0;
    VarianceHook variance_hook;  //!< required if lambda > 0
    int workers = 0;             //!< 0 = hardware concurrency
};

struct TrialPoint
{
    int round = 0;
    int labels_used = 0;
    double test_risk = 0.0;
};

struct TrialResult
{
    std::vector<TrialPoint> points;
    bool truncated = false;  //!< pool ran out before the configured rounds
};

//! Called with (-1, initial partition, empty) once at trial start, then
//! (round, partition after the move, picked indices) after each batch.
//! Must be thread-safe when used with a parallel run_experiment.
using RoundObserver =
    std::function<void(int round, const IndexPartition& part, const std::vector<int>& picked)>;

namespace detail {

//! Fits the configured classifier, degrading gracefully at cold start:
//! an empty L yields a constant-1 model, a single labeled point yields
//! that point's label as a constant for logistic.
inline ClassifierModel fit_or_fallback(const Dataset& ds, const std::vector<int>& labeled,
                                       const ClassifierConfig& cfg)
{
    if (labeled.empty())
        return ClassifierModel::constant(1, ds.dim());
    if (cfg.kind == ClassifierKind::logistic && labeled.size() == 1)
        return ClassifierModel::constant(ds.labels(labeled[0]), ds.dim());
    return fit(ds, labeled, cfg);
}

inline void move_to_labeled(IndexPartition& part, const std::vector<int>& picked)
{
    for (int id : picked) {
        const auto it = std::find(part.unlabeled.begin(), part.unlabeled.end(), id);
        if (it == part.unlabeled.end())
            throw std::logic_error("experiment: selected index not in the unlabeled pool");
        part.unlabeled.erase(it);
    }
    part.labeled.insert(part.labeled.end(), picked.begin(), picked.end());
    std::sort(part.labeled.begin(), part.labeled.end());
}

} // namespace detail

//! One repetition of the active-learning loop for one strategy.
//!
//! The oracle is simulated: a selected index's label is revealed by
//! moving the index from U to L, where the next fit reads the stored
//! ground-truth label. Selection randomness is drawn from a stream
//! seeded by (rep_seed, strategy slot, round), so trajectories are
//! deterministic and partitions are shared across strategies of the
//! same repetition. Until |L| >= 2 every strategy falls back to passive
//! (the risk estimator and LOOCV need two labeled points).
inline TrialResult run_trial(const Dataset& ds, const ExperimentConfig& cfg,
                             Strategy strategy, int slot, std::uint64_t rep_seed,
                             const RoundObserver& observer = {})
{
    IndexPartition part = make_partition(ds, cfg.warmup_size, cfg.test_fraction, rep_seed);
    if (observer)
        observer(-1, part, {});

    TrialResult result;
    for (int round = 0;; ++round) {
        const ClassifierModel model = detail::fit_or_fallback(ds, part.labeled, cfg.classifier);
        result.points.push_back({ round, static_cast<int>(part.labeled.size()),
                                  empirical_risk(model, ds, part.test) });
        if (round == cfg.rounds)
            break;
        if (static_cast<int>(part.unlabeled.size()) < cfg.batch_size) {
            result.truncated = true;
            break;
        }

        Rng rng(mix_seed(rep_seed, static_cast<std::uint64_t>(slot) + 1,
                         static_cast<std::uint64_t>(round) + 1));
        const Strategy effective =
            part.labeled.size() < 2 ? Strategy::passive : strategy;

        std::vector<int> picked;
        switch (effective) {
        case Strategy::passive:
            picked = select_passive(part.unlabeled, cfg.batch_size, rng);
            break;
        case Strategy::uncertainty:
            picked = select_uncertainty(part.unlabeled, cfg.batch_size, model, ds, rng);
            break;
        case Strategy::local_risk_batch:
        case Strategy::survey: {
            const BandwidthGrid grid =
                default_grid(rows_at(ds, part.labeled), cfg.risk.grid_min_factor,
                             cfg.risk.grid_max_factor, cfg.risk.grid_size);
            const RiskField field =
                risk_field(model, part, ds, grid, cfg.risk.loss_mode);
            picked = effective == Strategy::survey
                         ? select_survey(part.unlabeled, cfg.batch_size, field, rng)
                         : select_local_risk_batch(part.unlabeled, cfg.batch_size, field,
                                                   cfg.lambda, cfg.variance_hook, rng);
            break;
        }
        }

        detail::move_to_labeled(part, picked);
        if (observer)
            observer(round, part, picked);
    }
    return result;
}

//! Sample standard deviation (n-1 denominator) over sqrt(n); 0 for n=1.
inline double sem(const std::vector<double>& values)
{
    if (values.empty())
        throw std::invalid_argument("sem: empty list");
    const std::size_t n = values.size();
    if (n == 1)
        return 0.0;
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

struct CurvePoint
{
    int labels_used = 0;
    double mean = 0.0;
    double sem = 0.0;
    int n_reps = 0;
};

struct LearningCurve
{
    std::string strategy_id;
    std::vector<CurvePoint> points;
};

struct RawRow
{
    std::string strategy_id;
    int rep = 0;
    int round = 0;
    int labels_used = 0;
    double test_risk = 0.0;
};

struct ExperimentResult
{
    std::vector<LearningCurve> curves;  //!< one per strategy slot
    std::vector<LearningCurve> diffs;   //!< per-repetition (passive - strategy), aggregated
    std::vector<RawRow> raw;
    bool truncated = false;
};

//! Unique id per strategy slot: repeated names get a _2, _3, ... suffix.
inline std::vector<std::string> strategy_ids(const std::vector<Strategy>& strategies)
{
    std::vector<std::string> ids;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        const std::string base = strategy_name(strategies[s]);
        int occurrence = 1;
        for (std::size_t t = 0; t < s; ++t)
            if (strategies[t] == strategies[s])
                ++occurrence;
        ids.push_back(occurrence == 1 ? base : base + "_" + std::to_string(occurrence));
    }
    return ids;
}

//! Runs R paired repetitions of every strategy and aggregates learning
//! curves plus difference curves against the first passive entry.
//!
//! Repetition r uses seed base_seed + r for its partition (shared across
//! strategies) and per-round selection streams keyed by strategy slot.
//! Work is distributed over `cfg.workers` threads; outputs are
//! byte-identical for any worker count because each (strategy, rep)
//! task is self-contained and aggregation is an ordered fold.
inline ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg,
                                       const RoundObserver& observer = {})
{
    if (cfg.repetitions < 1)
        throw std::invalid_argument("run_experiment: repetitions must be >= 1");
    if (cfg.strategies.empty())
        throw std::invalid_argument("run_experiment: strategy list is empty");

    const std::size_t nslots = cfg.strategies.size();
    const std::size_t nreps = static_cast<std::size_t>(cfg.repetitions);
    std::vector<std::vector<TrialResult>> trials(nslots,
                                                 std::vector<TrialResult>(nreps));

    const std::size_t ntasks = nslots * nreps;
    unsigned nworkers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                        : std::thread::hardware_concurrency();
    nworkers = std::max(1u, std::min<unsigned>(nworkers, static_cast<unsigned>(ntasks)));

    std::atomic<std::size_t> next { 0 };
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= ntasks)
                return;
            const std::size_t slot = t / nreps;
            const std::size_t rep = t % nreps;
            try {
                trials[slot][rep] =
                    run_trial(ds, cfg, cfg.strategies[slot], static_cast<int>(slot),
                              cfg.base_seed + rep + 1, observer);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                return;
            }
        }
    };
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(nworkers);
        for (unsigned w = 0; w < nworkers; ++w)
            threads.emplace_back(worker);
        for (auto& th : threads)
            th.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    const std::vector<std::string> ids = strategy_ids(cfg.strategies);
    ExperimentResult result;

    std::size_t npoints = trials[0][0].points.size();
    for (const auto& per_slot : trials)
        for (const auto& trial : per_slot) {
            npoints = std::min(npoints, trial.points.size());
            result.truncated = result.truncated || trial.truncated;
        }

    for (std::size_t slot = 0; slot < nslots; ++slot) {
        LearningCurve curve;
        curve.strategy_id = ids[slot];
        for (std::size_t p = 0; p < npoints; ++p) {
            std::vector<double> risks(nreps);
            for (std::size_t rep = 0; rep < nreps; ++rep)
                risks[rep] = trials[slot][rep].points[p].test_risk;
            double mean = 0.0;
            for (double v : risks)
                mean += v;
            mean /= static_cast<double>(nreps);
            curve.points.push_back({ trials[slot][0].points[p].labels_used, mean,
                                     sem(risks), static_cast<int>(nreps) });
        }
        result.curves.push_back(std::move(curve));

        for (std::size_t rep = 0; rep < nreps; ++rep)
            for (std::size_t p = 0; p < npoints; ++p)
                result.raw.push_back({ ids[slot], static_cast<int>(rep) + 1,
                                       trials[slot][rep].points[p].round,
                                       trials[slot][rep].points[p].labels_used,
                                       trials[slot][rep].points[p].test_risk });
    }

    std::size_t baseline = nslots;
    for (std::size_t slot = 0; slot < nslots; ++slot)
        if (cfg.strategies[slot] == Strategy::passive) {
            baseline = slot;
            break;
        }
    if (baseline < nslots) {
        for (std::size_t slot = 0; slot < nslots; ++slot) {
            LearningCurve diff;
            diff.strategy_id = ids[slot];
            for (std::size_t p = 0; p < npoints; ++p) {
                std::vector<double> d(nreps);
                for (std::size_t rep = 0; rep < nreps; ++rep)
                    d[rep] = trials[baseline][rep].points[p].test_risk
                             - trials[slot][rep].points[p].test_risk;
                double mean = 0.0;
                for (double v : d)
                    mean += v;
                mean /= static_cast<double>(nreps);
                diff.points.push_back({ trials[slot][0].points[p].labels_used, mean,
                                        sem(d), static_cast<int>(nreps) });
            }
            result.diffs.push_back(std::move(diff));
        }
    }
    return result;
}

namespace detail {

inline std::string format_g9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace detail

//! Long-format per-repetition trajectories.
inline void write_raw_csv(const ExperimentResult& result, const std::string& path)
{
    auto out = detail::open_out(path);
    out << "strategy,rep,round,labels_used,test_risk\n";
    for (const auto& row : result.raw)
        out << row.strategy_id << ',' << row.rep << ',' << row.round << ','
            << row.labels_used << ',' << detail::format_g9(row.test_risk) << '\n';
}

//! Mean learning curves with SEM.
inline void write_aggregate_csv(const ExperimentResult& result, const std::string& path)
{
    auto out = detail::open_out(path);
    out << "strategy,labels_used,mean_risk,sem,n_reps\n";
    for (const auto& curve : result.curves)
        for (const auto& pt : curve.points)
            out << curve.strategy_id << ',' << pt.labels_used << ','
                << detail::format_g9(pt.mean) << ',' << detail::format_g9(pt.sem) << ','
                << pt.n_reps << '\n';
}

//! Difference curves (passive minus strategy; positive favors the strategy).
inline void write_diff_csv(const ExperimentResult& result, const std::string& path)
{
    auto out = detail::open_out(path);
    out << "strategy,labels_used,mean_diff_vs_passive,sem_diff\n";
    for (const auto& curve : result.diffs)
        for (const auto& pt : curve.points)
            out << curve.strategy_id << ',' << pt.labels_used << ','
                << detail::format_g9(pt.mean) << ',' << detail::format_g9(pt.sem) << '\n';
}

} // namespace alrisk
