#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <alrisk/alrisk.hpp>

namespace testutil {

inline std::string source_path(const std::string& rel)
{
    return std::string(ALRISK_SOURCE_DIR) + "/" + rel;
}

inline std::string wbc_path() { return source_path("data/wbc.csv"); }

inline alrisk::LoadOptions wbc_options()
{
    alrisk::LoadOptions opts;
    opts.label_column = "diagnosis";
    opts.positive_label = "M";
    opts.drop_columns = { "id" };
    return opts;
}

//! Two Gaussian-ish blobs with overlap; labels follow the blob.
inline alrisk::Dataset synthetic_blobs(int n, int d, std::uint64_t seed,
                                       double separation = 2.0)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    alrisk::Dataset ds;
    ds.features.resize(n, d);
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        const int y = i % 2;
        ds.labels(i) = y;
        for (int j = 0; j < d; ++j)
            ds.features(i, j) = noise(gen) + (y ? separation : 0.0);
    }
    for (int j = 0; j < d; ++j)
        ds.feature_names.push_back("f" + std::to_string(j));
    ds.source_id = "synthetic_blobs";
    return ds;
}

//! Brute-force NW estimate written independently of the library (plain
//! loops, no shared kernel helper).  Mirrors the documented kernel rule:
//! weights below the smallest normal double count as zero.
inline double brute_nw(const Eigen::VectorXd& x, const Eigen::MatrixXd& XL,
                       const Eigen::VectorXd& losses, double h)
{
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < XL.rows(); ++i) {
        double d2 = 0.0;
        for (Eigen::Index j = 0; j < XL.cols(); ++j) {
            const double diff = x(j) - XL(i, j);
            d2 += diff * diff;
        }
        double w = std::exp(-d2 / h);
        if (w < 2.2250738585072014e-308)
            w = 0.0;
        num += w * losses(i);
        den += w;
    }
    if (den == 0.0)
        return losses.sum() / static_cast<double>(XL.rows());
    return num / den;
}

//! Brute-force E(h): explicit exclusion of each point, re-estimating
//! from the reduced set.
inline double brute_loocv_objective(const Eigen::MatrixXd& XL, const Eigen::VectorXd& losses,
                                    double h)
{
    const Eigen::Index n = XL.rows();
    double e = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::MatrixXd Xrest(n - 1, XL.cols());
        Eigen::VectorXd lrest(n - 1);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == j)
                continue;
            Xrest.row(r) = XL.row(i);
            lrest(r) = losses(i);
            ++r;
        }
        const double held_out = brute_nw(XL.row(j).transpose(), Xrest, lrest, h);
        e += (losses(j) - held_out) * (losses(j) - held_out);
    }
    return e / static_cast<double>(n);
}

//! Brute-force grid minimizer with the smallest-h tie rule.
inline double brute_loocv_bandwidth(const Eigen::MatrixXd& XL, const Eigen::VectorXd& losses,
                                    const std::vector<double>& grid)
{
    double best_h = grid.front();
    double best_e = brute_loocv_objective(XL, losses, grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double e = brute_loocv_objective(XL, losses, grid[i]);
        if (e < best_e) {
            best_e = e;
            best_h = grid[i];
        }
    }
    return best_h;
}

//! knn vote fraction by exhaustive distance sort (lower index wins ties),
//! optionally excluding one training position.
inline double brute_knn_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, int k,
                                  const Eigen::VectorXd& q, int exclude = -1)
{
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < X.rows(); ++i) {
        if (i == exclude)
            continue;
        double d2 = 0.0;
        for (int j = 0; j < X.cols(); ++j)
            d2 += (X(i, j) - q(j)) * (X(i, j) - q(j));
        order.emplace_back(d2, i);
    }
    std::sort(order.begin(), order.end());
    const int kk = std::min<int>(k, static_cast<int>(order.size()));
    int ones = 0;
    for (int i = 0; i < kk; ++i)
        ones += y(order[i].second);
    return static_cast<double>(ones) / kk;
}

inline alrisk::RiskField field_from(const std::vector<int>& pool,
                                    const std::vector<double>& risks)
{
    alrisk::RiskField f;
    f.pool = pool;
    f.values = Eigen::Map<const Eigen::VectorXd>(risks.data(),
                                                 static_cast<Eigen::Index>(risks.size()));
    f.bandwidth = 1.0;
    return f;
}

} // namespace testutil
