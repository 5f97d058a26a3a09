#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <alrisk/classifier.hpp>
#include <alrisk/dataset.hpp>

namespace alrisk {

//! How training losses for the risk estimator are computed.
//!
//! `resubstitution` scores each labeled point with the model as fitted;
//! `leave_one_out` (knn only) excludes the point from its own neighbor
//! pool, which keeps small-k losses from degenerating to all-zero.
enum class LossMode { resubstitution, leave_one_out };

//! Fixed ascending bandwidth grid H.
struct BandwidthGrid
{
    std::vector<double> values;

    BandwidthGrid() = default;

    explicit BandwidthGrid(std::vector<double> v)
        : values(std::move(v))
    {
        if (values.empty())
            throw std::invalid_argument("BandwidthGrid: grid must be non-empty");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0))
                throw std::invalid_argument("BandwidthGrid: all values must be positive");
            if (i > 0 && !(values[i] > values[i - 1]))
                throw std::invalid_argument("BandwidthGrid: values must be strictly increasing");
        }
    }

    //! `size` log-spaced values from `lo` to `hi` inclusive.
    static BandwidthGrid logspace(double lo, double hi, int size)
    {
        if (size < 1)
            throw std::invalid_argument("BandwidthGrid::logspace: size must be >= 1");
        if (!(lo > 0.0) || (size > 1 && !(hi > lo)))
            throw std::invalid_argument("BandwidthGrid::logspace: need 0 < lo < hi");
        std::vector<double> v(size);
        if (size == 1) {
            v[0] = lo;
        } else {
            const double la = std::log(lo);
            const double lb = std::log(hi);
            for (int i = 0; i < size; ++i)
                v[i] = std::exp(la + (lb - la) * i / (size - 1));
            v.front() = lo;
            v.back() = hi;
        }
        return BandwidthGrid(std::move(v));
    }
};

//! Estimated local risk over the unlabeled pool, plus the ingredients
//! (bandwidth, training losses) the estimate was built from.
struct RiskField
{
    std::vector<int> pool;      //!< dataset indices (U), aligned with `values`
    Eigen::VectorXd values;     //!< estimated risk per pool member, in [0,1]
    double bandwidth = 0.0;
    std::vector<int> labeled;   //!< dataset indices (L), aligned with `losses`
    Eigen::VectorXd losses;     //!< 0/1 training losses
};

namespace detail {

//! Matrix of squared Euclidean distances between the rows of A and B,
//! clamped at 0 (the product form can go slightly negative).
inline Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * A * B.transpose());
    d2.colwise() += a2;
    d2.rowwise() += b2.transpose();
    return d2.cwiseMax(0.0);
}

//! Median of the off-diagonal pairwise squared distances (even count:
//! mean of the two middle order statistics); 1.0 when fewer than two rows.
inline double median_pairwise_sq_dist(const Eigen::MatrixXd& X)
{
    const Eigen::Index n = X.rows();
    if (n < 2)
        return 1.0;
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d.push_back((X.row(i) - X.row(j)).squaredNorm());
    std::sort(d.begin(), d.end());
    const std::size_t m = d.size();
    return m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
}

//! exp(-z) with results below the smallest normal double treated as 0.
//! Subnormal weights carry almost no significand and make ratios depend
//! on exp-implementation ulps, so the underflow cutoff is pinned to the
//! normal range instead.
inline double clamped_exp_neg(double z)
{
    const double w = std::exp(-z);
    return w < std::numeric_limits<double>::min() ? 0.0 : w;
}

//! Element-wise kernel weights exp(-D2 / h) with the same underflow rule.
inline Eigen::MatrixXd kernel_table(const Eigen::MatrixXd& D2, double h)
{
    Eigen::MatrixXd W = (-D2.array() / h).exp();
    W = (W.array() < std::numeric_limits<double>::min()).select(0.0, W);
    return W;
}

} // namespace detail

//! Log-spaced grid of `size` bandwidths anchored to the labeled data:
//! factors from `min_factor` to `max_factor` times the median pairwise
//! squared distance of `labeled_X` (anchor 1.0 when no pairs exist).
inline BandwidthGrid default_grid(const Eigen::MatrixXd& labeled_X,
                                  double min_factor = 1e-2, double max_factor = 1e2,
                                  int size = 16)
{
    double anchor = detail::median_pairwise_sq_dist(labeled_X);
    if (!(anchor > 0.0))
        anchor = 1.0;
    return BandwidthGrid::logspace(min_factor * anchor, max_factor * anchor, size);
}

//! Gaussian kernel K_h(x, x2) = exp(-|x - x2|^2 / h). Weights that fall
//! below the smallest normal double count as underflowed to 0.
inline double gaussian_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, double h)
{
    if (!(h > 0.0))
        throw std::invalid_argument("gaussian_kernel: bandwidth must be positive");
    if (x.size() != x2.size())
        throw std::invalid_argument("gaussian_kernel: dimension mismatch");
    return detail::clamped_exp_neg((x - x2).squaredNorm() / h);
}

//! Nadaraya-Watson estimate of the local risk at `x`:
//!   sum_i losses_i * K_h(x, XL_i) / sum_j K_h(x, XL_j).
//! If every kernel weight underflows to zero, returns the unweighted
//! mean loss instead.
inline double nw_estimate(const Eigen::VectorXd& x, const Eigen::MatrixXd& XL,
                          const Eigen::VectorXd& losses, double h)
{
    if (XL.rows() < 1)
        throw std::invalid_argument("nw_estimate: need at least 1 labeled point");
    if (XL.rows() != losses.size())
        throw std::invalid_argument("nw_estimate: features/losses size mismatch");
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < XL.rows(); ++i) {
        const double w = gaussian_kernel(x, XL.row(i).transpose(), h);
        num += w * losses(i);
        den += w;
    }
    if (den == 0.0)
        return losses.mean();
    return num / den;
}

//! 0/1 loss of the model on each labeled point, in the order of `labeled`.
inline Eigen::VectorXd loss_vector(const ClassifierModel& m, const Dataset& ds,
                                   const std::vector<int>& labeled, LossMode mode)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(labeled.size()));
    if (mode == LossMode::leave_one_out) {
        if (m.kind() != ClassifierKind::knn)
            throw std::invalid_argument(
                "loss_vector: leave_one_out is only defined for knn models");
        if (labeled.size() < 2)
            throw std::invalid_argument("loss_vector: leave_one_out needs >= 2 points");
        for (std::size_t j = 0; j < labeled.size(); ++j) {
            const int yhat = m.posterior_loo(static_cast<int>(j)) >= 0.5 ? 1 : 0;
            out(static_cast<Eigen::Index>(j)) = zero_one_loss(ds.labels(labeled[j]), yhat);
        }
    } else {
        for (std::size_t j = 0; j < labeled.size(); ++j) {
            const int yhat = m.predict(ds.features.row(labeled[j]).transpose());
            out(static_cast<Eigen::Index>(j)) = zero_one_loss(ds.labels(labeled[j]), yhat);
        }
    }
    return out;
}

//! Leave-one-out objective E(h): mean over j of
//! (losses_j - NW estimate at XL_j from the other points)^2.
//! `D2` is the precomputed pairwise squared-distance table of XL.
inline double loocv_objective_from_table(const Eigen::MatrixXd& D2,
                                         const Eigen::VectorXd& losses, double h)
{
    const Eigen::Index n = D2.rows();
    // zeroing the diagonal removes the j-th point from its own row, so the
    // held-out sums need no subtraction (which would cancel badly when the
    // other weights are tiny against the diagonal's exp(0) = 1)
    Eigen::MatrixXd W = detail::kernel_table(D2, h);
    W.diagonal().setZero();
    const Eigen::VectorXd rowsum = W.rowwise().sum();
    const Eigen::VectorXd num = W * losses;
    const double total_loss = losses.sum();
    double e = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double den = rowsum(j);
        const double held_out = den > 0.0 ? num(j) / den
                                          : (total_loss - losses(j)) / (n - 1);
        const double r = losses(j) - held_out;
        e += r * r;
    }
    return e / static_cast<double>(n);
}

//! E(h) computed directly from labeled features.
inline double loocv_objective(const Eigen::MatrixXd& XL, const Eigen::VectorXd& losses,
                              double h)
{
    if (XL.rows() < 2)
        throw std::invalid_argument("loocv_objective: need at least 2 labeled points");
    return loocv_objective_from_table(detail::pairwise_sq_dists(XL, XL), losses, h);
}

//! Bandwidth minimizing E(h) over the grid; ties toward the smallest h.
inline double loocv_bandwidth(const Eigen::MatrixXd& XL, const Eigen::VectorXd& losses,
                              const BandwidthGrid& grid)
{
    if (XL.rows() < 2)
        throw std::invalid_argument("loocv_bandwidth: need at least 2 labeled points");
    if (XL.rows() != losses.size())
        throw std::invalid_argument("loocv_bandwidth: features/losses size mismatch");
    if (grid.values.empty())
        throw std::invalid_argument("loocv_bandwidth: empty grid");
    const Eigen::MatrixXd D2 = detail::pairwise_sq_dists(XL, XL);
    double best_h = grid.values.front();
    double best_e = loocv_objective_from_table(D2, losses, grid.values.front());
    for (std::size_t i = 1; i < grid.values.size(); ++i) {
        const double e = loocv_objective_from_table(D2, losses, grid.values[i]);
        if (e < best_e) {
            best_e = e;
            best_h = grid.values[i];
        }
    }
    return best_h;
}

//! Builds the full risk field over the unlabeled pool: training losses,
//! LOOCV bandwidth, then one NW evaluation per pool member.
inline RiskField risk_field(const ClassifierModel& m, const IndexPartition& part,
                            const Dataset& ds, const BandwidthGrid& grid, LossMode mode)
{
    if (part.labeled.size() < 2)
        throw std::invalid_argument("risk_field: need at least 2 labeled points");
    RiskField f;
    f.labeled = part.labeled;
    f.pool = part.unlabeled;
    f.losses = loss_vector(m, ds, part.labeled, mode);

    const Eigen::MatrixXd XL = rows_at(ds, part.labeled);
    f.bandwidth = loocv_bandwidth(XL, f.losses, grid);

    const Eigen::MatrixXd XU = rows_at(ds, part.unlabeled);
    const Eigen::MatrixXd D2 = detail::pairwise_sq_dists(XU, XL);
    const Eigen::ArrayXXd W = detail::kernel_table(D2, f.bandwidth);
    const double mean_loss = f.losses.size() ? f.losses.mean() : 0.0;
    f.values.resize(static_cast<Eigen::Index>(part.unlabeled.size()));
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        const double den = W.row(i).sum();
        f.values(i) = den == 0.0 ? mean_loss : W.row(i).matrix().dot(f.losses) / den;
    }
    return f;
}

} // namespace alrisk
