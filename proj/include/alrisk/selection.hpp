#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <alrisk/classifier.hpp>
#include <alrisk/local_risk.hpp>
#include <alrisk/random.hpp>

namespace alrisk {

//! Optional per-index variance estimate V(X_i) for the batch-argmax
//! score R(X_i) + lambda * V(X_i). No estimator ships; callers may plug
//! one in.
using VarianceHook = std::function<double(int)>;

//! Capped inclusion probabilities (Eq.-2 style): pi_i proportional to
//! risk, items whose probability exceeds 1 moved to `auto_included`,
//! the proportional rule re-applied to the remainder. When the residual
//! total risk is 0 the leftover `uniform_slots` slots must be filled
//! uniformly. Entries of `probs` and `auto_included` are positions into
//! the risk vector the probabilities were computed from.
struct InclusionProbabilities
{
    std::vector<double> probs;
    std::vector<int> auto_included;
    int uniform_slots = 0;
};

namespace detail {

//! Risks aligned with `pool`, looked up from the field by dataset index.
inline std::vector<double> risks_for(const RiskField& field, const std::vector<int>& pool)
{
    std::unordered_map<int, double> byindex;
    byindex.reserve(field.pool.size());
    for (std::size_t i = 0; i < field.pool.size(); ++i)
        byindex[field.pool[i]] = field.values(static_cast<Eigen::Index>(i));
    std::vector<double> out(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto it = byindex.find(pool[i]);
        if (it == byindex.end())
            throw std::invalid_argument("selection: pool index "
                                        + std::to_string(pool[i])
                                        + " is not covered by the risk field");
        out[i] = it->second;
    }
    return out;
}

inline void check_batch(std::size_t pool_size, int k)
{
    if (k < 1)
        throw std::invalid_argument("selection: batch size must be >= 1");
    if (static_cast<std::size_t>(k) > pool_size)
        throw std::invalid_argument("selection: batch size " + std::to_string(k)
                                    + " exceeds pool size " + std::to_string(pool_size));
}

//! Positions of the k smallest scores; tied scores are ordered uniformly
//! at random (random shuffle, then stable sort by score).
inline std::vector<int> k_smallest_positions(const std::vector<double>& scores, int k,
                                             Rng& rng)
{
    std::vector<int> pos(scores.size());
    std::iota(pos.begin(), pos.end(), 0);
    rng.shuffle(pos);
    std::stable_sort(pos.begin(), pos.end(),
                     [&](int a, int b) { return scores[a] < scores[b]; });
    pos.resize(k);
    return pos;
}

} // namespace detail

//! Uniform random K-subset of the pool.
inline std::vector<int> select_passive(const std::vector<int>& pool, int k, Rng& rng)
{
    detail::check_batch(pool.size(), k);
    return rng.sample_without_replacement(pool, k);
}

//! The K pool members whose posterior is closest to 1/2; ties uniform.
inline std::vector<int> select_uncertainty(const std::vector<int>& pool, int k,
                                           const ClassifierModel& m, const Dataset& ds,
                                           Rng& rng)
{
    detail::check_batch(pool.size(), k);
    std::vector<double> margin(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        margin[i] = std::abs(m.posterior(ds.features.row(pool[i]).transpose()) - 0.5);
    std::vector<int> out;
    out.reserve(k);
    for (int p : detail::k_smallest_positions(margin, k, rng))
        out.push_back(pool[p]);
    return out;
}

//! Batch argmax on the risk field: K rounds of picking uniformly among
//! the maximizers of R(X_i) + lambda * V(X_i) and removing the pick.
inline std::vector<int> select_local_risk_batch(const std::vector<int>& pool, int k,
                                                const RiskField& field, double lambda,
                                                const VarianceHook& variance, Rng& rng)
{
    detail::check_batch(pool.size(), k);
    if (lambda < 0.0)
        throw std::invalid_argument("select_local_risk_batch: lambda must be >= 0");
    if (lambda > 0.0 && !variance)
        throw std::invalid_argument(
            "select_local_risk_batch: lambda > 0 requires a variance hook");

    std::vector<double> score = detail::risks_for(field, pool);
    if (lambda > 0.0)
        for (std::size_t i = 0; i < pool.size(); ++i)
            score[i] += lambda * variance(pool[i]);

    std::vector<int> remaining(pool.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> out;
    out.reserve(k);
    std::vector<int> ties;
    for (int round = 0; round < k; ++round) {
        double best = score[remaining[0]];
        for (int p : remaining)
            best = std::max(best, score[p]);
        ties.clear();
        for (int p : remaining)
            if (score[p] == best)
                ties.push_back(p);
        const int pick = ties[rng.uniform_below(ties.size())];
        out.push_back(pool[pick]);
        remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
    }
    return out;
}

//! Eq.-2 inclusion probabilities with iterative capping: start from
//! pi_i = K * R_i / sum(R); while any pi exceeds 1, auto-include those
//! items and recompute with the reduced batch size over the remainder.
//! A zero residual risk total flags the leftover slots for uniform fill.
inline InclusionProbabilities inclusion_probabilities(const std::vector<double>& risks,
                                                      int k)
{
    detail::check_batch(risks.size(), k);
    for (double r : risks)
        if (!(r >= 0.0))
            throw std::invalid_argument("inclusion_probabilities: risks must be >= 0");

    InclusionProbabilities out;
    out.probs.assign(risks.size(), 0.0);
    std::vector<int> active(risks.size());
    std::iota(active.begin(), active.end(), 0);
    int k_rem = k;

    while (true) {
        double total = 0.0;
        for (int i : active)
            total += risks[i];
        if (total <= 0.0) {
            out.uniform_slots = k_rem;
            for (int i : active)
                out.probs[i] = 0.0;
            break;
        }
        bool capped = false;
        std::vector<int> keep;
        keep.reserve(active.size());
        for (int i : active) {
            const double pi = k_rem * risks[i] / total;
            if (pi > 1.0) {
                out.auto_included.push_back(i);
                out.probs[i] = 0.0; // may hold a value from an earlier pass
                --k_rem;
                capped = true;
            } else {
                out.probs[i] = pi;
                keep.push_back(i);
            }
        }
        if (!capped)
            break;
        active = std::move(keep);
        if (active.empty()) {
            out.uniform_slots = k_rem;
            break;
        }
    }
    std::sort(out.auto_included.begin(), out.auto_included.end());
    return out;
}

//! Conditional-Poisson survey draw: auto-included items are taken
//! outright, the remaining slots are filled by whole Bernoulli(pi)
//! passes over the residual pool, rejected until exactly the required
//! count comes out. Zero-risk slots are filled uniformly. After 10000
//! rejected passes, falls back to sequential probability-proportional-
//! to-pi draws without replacement (with a warning).
inline std::vector<int> select_survey(const std::vector<int>& pool, int k,
                                      const RiskField& field, Rng& rng)
{
    detail::check_batch(pool.size(), k);
    const std::vector<double> risks = detail::risks_for(field, pool);
    const InclusionProbabilities ip = inclusion_probabilities(risks, k);

    std::vector<int> out;
    out.reserve(k);
    std::vector<bool> is_auto(pool.size(), false);
    for (int p : ip.auto_included) {
        is_auto[p] = true;
        out.push_back(pool[p]);
    }

    std::vector<int> residual;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (!is_auto[i])
            residual.push_back(static_cast<int>(i));

    if (ip.uniform_slots > 0) {
        std::vector<int> residual_ids;
        residual_ids.reserve(residual.size());
        for (int p : residual)
            residual_ids.push_back(pool[p]);
        for (int id : rng.sample_without_replacement(residual_ids, ip.uniform_slots))
            out.push_back(id);
        return out;
    }

    const int need = k - static_cast<int>(ip.auto_included.size());
    if (need == 0)
        return out;

    constexpr int max_passes = 10000;
    std::vector<int> picked;
    for (int pass = 0; pass < max_passes; ++pass) {
        picked.clear();
        for (int p : residual)
            if (rng.bernoulli(ip.probs[p]))
                picked.push_back(p);
        if (static_cast<int>(picked.size()) == need) {
            for (int p : picked)
                out.push_back(pool[p]);
            return out;
        }
    }

    std::fprintf(stderr,
                 "alrisk: select_survey rejection cap (%d passes) exceeded; "
                 "falling back to probability-proportional sampling\n",
                 max_passes);
    std::vector<int> avail = residual;
    for (int t = 0; t < need; ++t) {
        double total = 0.0;
        for (int p : avail)
            total += ip.probs[p];
        std::size_t chosen = avail.size() - 1;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < avail.size(); ++i) {
                acc += ip.probs[avail[i]];
                if (u < acc) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = rng.uniform_below(avail.size());
        }
        out.push_back(pool[avail[chosen]]);
        avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    return out;
}

} // namespace alrisk
