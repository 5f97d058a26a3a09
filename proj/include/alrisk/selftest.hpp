#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <alrisk/local_risk.hpp>
#include <alrisk/random.hpp>
#include <alrisk/selection.hpp>

namespace alrisk {

//! Test fixture hooks for cmd_selftest. `corrupt_kernel` perturbs the
//! bandwidth fed into the Nadaraya-Watson hand cases so that the check
//! fails on purpose; the CLI never sets it.
struct SelftestOptions
{
    bool corrupt_kernel = false;
};

namespace detail {

inline RiskField field_from(const std::vector<int>& pool, const std::vector<double>& risks)
{
    RiskField f;
    f.pool = pool;
    f.values = Eigen::Map<const Eigen::VectorXd>(risks.data(),
                                                 static_cast<Eigen::Index>(risks.size()));
    f.bandwidth = 1.0;
    return f;
}

} // namespace detail

//! Runs the built-in oracle checks, printing one pass/fail line per
//! check. Returns 0 if all pass, 2 otherwise. Deterministic: fixed
//! seeds, identical report on every run.
inline int run_selftest(std::ostream& out, const SelftestOptions& opts = {})
{
    struct Check
    {
        std::string name;
        std::function<bool()> run;
    };

    const double h_hand = opts.corrupt_kernel ? 1.02 : 1.0;

    std::vector<Check> checks;

    checks.push_back({ "gaussian kernel hand values", [&] {
        Eigen::VectorXd a(2), b(2);
        a << 0.3, -1.2;
        b = a;
        if (gaussian_kernel(a, b, 2.5) != 1.0)
            return false;
        Eigen::VectorXd c(1), d(1);
        c << 0.0;
        d << 1.0;
        return std::abs(gaussian_kernel(c, d, h_hand) - 0.36787944117144233) < 1e-12;
    } });

    checks.push_back({ "nadaraya-watson hand cases", [&] {
        Eigen::MatrixXd X1(1, 1);
        X1 << 4.0;
        Eigen::VectorXd l1(1);
        l1 << 1.0;
        Eigen::VectorXd q(1);
        q << -3.0;
        if (nw_estimate(q, X1, l1, 7.0) != 1.0)
            return false;
        // two points at 0 and 1, losses 1 and 0, query at 0, h = 1:
        // estimate = 1 / (1 + e^-1)
        Eigen::MatrixXd X2(2, 1);
        X2 << 0.0, 1.0;
        Eigen::VectorXd l2(2);
        l2 << 1.0, 0.0;
        q << 0.0;
        if (std::abs(nw_estimate(q, X2, l2, h_hand) - 0.7310585786300049) > 1e-12)
            return false;
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
        q << 0.37;
        return nw_estimate(q, X2, zero, 3.0) == 0.0;
    } });

    checks.push_back({ "loocv smallest-h tie rule", [&] {
        Eigen::MatrixXd X(3, 1);
        X << 0.0, 1.0, 2.0;
        const Eigen::VectorXd losses = Eigen::VectorXd::Constant(3, 1.0);
        const BandwidthGrid grid = BandwidthGrid::logspace(0.1, 10.0, 5);
        return loocv_bandwidth(X, losses, grid) == grid.values.front();
    } });

    checks.push_back({ "inclusion probabilities, proportional case", [&] {
        const auto ip = inclusion_probabilities({ 0.4, 0.4, 0.2 }, 2);
        return ip.auto_included.empty() && ip.uniform_slots == 0
               && std::abs(ip.probs[0] - 0.8) < 1e-12 && std::abs(ip.probs[1] - 0.8) < 1e-12
               && std::abs(ip.probs[2] - 0.4) < 1e-12;
    } });

    checks.push_back({ "inclusion probabilities, capped case", [&] {
        const auto ip = inclusion_probabilities({ 0.9, 0.05, 0.05 }, 2);
        return ip.auto_included == std::vector<int> { 0 } && ip.uniform_slots == 0
               && ip.probs[0] == 0.0 && std::abs(ip.probs[1] - 0.5) < 1e-12
               && std::abs(ip.probs[2] - 0.5) < 1e-12;
    } });

    checks.push_back({ "inclusion probabilities, zero-risk fallback", [&] {
        const auto ip = inclusion_probabilities({ 0.0, 0.0, 0.0 }, 2);
        return ip.auto_included.empty() && ip.uniform_slots == 2 && ip.probs[0] == 0.0
               && ip.probs[1] == 0.0 && ip.probs[2] == 0.0;
    } });

    checks.push_back({ "survey sampler monte carlo", [&] {
        const std::vector<int> pool = { 10, 11, 12 };
        const RiskField f = detail::field_from(pool, { 0.9, 0.05, 0.05 });
        Rng rng(20240901);
        int count[3] = { 0, 0, 0 };
        const int draws = 10000;
        for (int t = 0; t < draws; ++t) {
            const auto sel = select_survey(pool, 2, f, rng);
            if (sel.size() != 2)
                return false;
            for (int id : sel)
                ++count[id - 10];
        }
        if (count[0] != draws)
            return false;
        const double f1 = static_cast<double>(count[1]) / draws;
        const double f2 = static_cast<double>(count[2]) / draws;
        return std::abs(f1 - 0.5) < 0.02 && std::abs(f2 - 0.5) < 0.02;
    } });

    checks.push_back({ "survey exact batch size", [&] {
        const std::vector<int> pool = { 0, 1, 2, 3, 4, 5, 6 };
        const RiskField f =
            detail::field_from(pool, { 0.3, 0.05, 0.7, 0.0, 0.12, 0.9, 0.44 });
        Rng rng(7771);
        for (int t = 0; t < 2000; ++t) {
            const auto sel = select_survey(pool, 3, f, rng);
            if (std::set<int>(sel.begin(), sel.end()).size() != 3)
                return false;
        }
        return true;
    } });

    checks.push_back({ "batch argmax picks top risks", [&] {
        const std::vector<int> pool = { 5, 6, 7, 8 };
        const RiskField f = detail::field_from(pool, { 0.1, 0.9, 0.4, 0.9 });
        Rng rng(99);
        for (int t = 0; t < 200; ++t) {
            auto sel = select_local_risk_batch(pool, 2, f, 0.0, {}, rng);
            std::sort(sel.begin(), sel.end());
            if (sel != std::vector<int> { 6, 8 })
                return false;
        }
        return true;
    } });

    int passed = 0;
    for (const auto& check : checks) {
        const bool ok = check.run();
        out << (ok ? "[PASS] " : "[FAIL] ") << check.name << '\n';
        passed += ok;
    }
    out << "selftest: " << passed << '/' << checks.size() << " checks passed\n";
    return passed == static_cast<int>(checks.size()) ? 0 : 2;
}

} // namespace alrisk
