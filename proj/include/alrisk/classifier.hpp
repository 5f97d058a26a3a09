#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include <alrisk/dataset.hpp>

namespace alrisk {

enum class ClassifierKind { knn, logistic };

//! Hyperparameters for `fit`. `k` applies to knn; `l2`, `max_iter` and
//! `tol` (gradient-norm stopping rule) apply to logistic regression.
struct ClassifierConfig
{
    ClassifierKind kind = ClassifierKind::knn;
    int k = 5;
    double l2 = 1e-4;
    int max_iter = 10000;
    double tol = 1e-6;
};

inline int zero_one_loss(int y, int yhat)
{
    if ((y != 0 && y != 1) || (yhat != 0 && yhat != 1))
        throw std::invalid_argument("zero_one_loss: labels must be 0 or 1");
    return y != yhat;
}

namespace detail {

//! log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }

//! 1 / (1 + exp(-t)) without overflow.
inline double sigmoid(double t)
{
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace detail

//! L2-regularized logistic loss and (optionally) its gradient.
//!
//! theta packs the weight vector in theta[0..d-1] and the intercept in
//! theta[d]; the penalty (l2/2)*|w|^2 leaves the intercept unregularized.
//! With signs z_i = 2*y_i - 1, the objective is
//!   mean_i log(1 + exp(-z_i * (w'x_i + b))) + (l2/2) * |w|^2.
inline double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                 const Eigen::VectorXd& theta, double l2,
                                 Eigen::VectorXd* grad = nullptr)
{
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (theta.size() != d + 1)
        throw std::invalid_argument("logistic_objective: theta must have length d+1");
    const auto w = theta.head(d);
    const double b = theta(d);

    double f = 0.0;
    Eigen::VectorXd coeff(n);
    const Eigen::VectorXd margins = X * w;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = 2.0 * y(i) - 1.0;
        const double t = -z * (margins(i) + b);
        f += detail::softplus(t);
        coeff(i) = -z * detail::sigmoid(t);
    }
    f = f / static_cast<double>(n) + 0.5 * l2 * w.squaredNorm();

    if (grad) {
        grad->resize(d + 1);
        grad->head(d) = X.transpose() * coeff / static_cast<double>(n) + l2 * w;
        (*grad)(d) = coeff.mean();
    }
    return f;
}

//! A fitted classifier: k-NN over stored training points, logistic
//! regression weights, or a constant fallback for degenerate inputs.
//!
//! predict and posterior are pure; instances are safe to share across
//! threads once fitted.
class ClassifierModel
{
public:
    ClassifierKind kind() const { return kind_; }
    bool degenerate() const { return degenerate_; }
    const std::vector<int>& training_indices() const { return training_indices_; }
    int k_effective() const { return std::min<int>(k_, static_cast<int>(train_X_.rows())); }
    const Eigen::VectorXd& weights() const { return w_; }
    double intercept() const { return b_; }

    //! Posterior score for label 1 (vote fraction for knn, sigmoid margin
    //! for logistic, the constant itself for degenerate models).
    double posterior(const Eigen::VectorXd& x) const
    {
        check_dim(x);
        switch (kind_) {
        case ClassifierKind::knn: return vote_fraction(x, -1);
        case ClassifierKind::logistic:
            if (degenerate_)
                return static_cast<double>(constant_label_);
            return detail::sigmoid(w_.dot(x) + b_);
        }
        return static_cast<double>(constant_label_);
    }

    int predict(const Eigen::VectorXd& x) const { return posterior(x) >= 0.5 ? 1 : 0; }

    //! Posterior of training point `pos` with itself left out (knn only);
    //! used by the leave-one-out loss mode.
    double posterior_loo(int pos) const
    {
        if (kind_ != ClassifierKind::knn)
            throw std::logic_error("posterior_loo: only defined for knn models");
        if (pos < 0 || pos >= train_X_.rows())
            throw std::out_of_range("posterior_loo: training position out of range");
        if (train_X_.rows() < 2)
            throw std::invalid_argument("posterior_loo: need at least 2 training points");
        return vote_fraction(train_X_.row(pos).transpose(), pos);
    }

    //! Constant classifier always answering `label`; flagged degenerate.
    static ClassifierModel constant(int label, int dim)
    {
        ClassifierModel m;
        m.kind_ = ClassifierKind::logistic;
        m.degenerate_ = true;
        m.constant_label_ = label;
        m.dim_ = dim;
        m.w_ = Eigen::VectorXd::Zero(dim);
        m.b_ = 0.0;
        return m;
    }

    static ClassifierModel fit_knn(const Dataset& ds, const std::vector<int>& labeled, int k)
    {
        if (labeled.empty())
            throw std::invalid_argument("fit: knn needs at least 1 labeled point");
        if (k < 1)
            throw std::invalid_argument("fit: knn neighbor count must be >= 1");
        ClassifierModel m;
        m.kind_ = ClassifierKind::knn;
        m.dim_ = ds.dim();
        m.k_ = k;
        m.train_X_ = rows_at(ds, labeled);
        m.train_y_ = labels_at(ds, labeled);
        m.training_indices_ = labeled;
        return m;
    }

    static ClassifierModel fit_logistic(const Dataset& ds, const std::vector<int>& labeled,
                                        const ClassifierConfig& cfg)
    {
        if (labeled.size() < 2)
            throw std::invalid_argument("fit: logistic needs at least 2 labeled points");
        const Eigen::VectorXi y = labels_at(ds, labeled);
        const int ones = y.sum();
        if (ones == 0 || ones == y.size()) {
            ClassifierModel m = constant(ones == 0 ? 0 : 1, ds.dim());
            m.training_indices_ = labeled;
            return m;
        }

        const Eigen::MatrixXd X = rows_at(ds, labeled);
        ClassifierModel m;
        m.kind_ = ClassifierKind::logistic;
        m.dim_ = ds.dim();
        m.training_indices_ = labeled;

        Eigen::VectorXd theta = Eigen::VectorXd::Zero(ds.dim() + 1);
        Eigen::VectorXd grad, grad_new, trial_grad;
        double f = logistic_objective(X, y, theta, cfg.l2, &grad);

        // Barzilai-Borwein steps safeguarded by Armijo backtracking: raw BB
        // can diverge on ill-conditioned subsets, so each step must satisfy
        // the sufficient-decrease condition before it is accepted.
        double step = 1.0 / std::max(1.0, grad.norm());
        Eigen::VectorXd s, yv;
        for (int iter = 0; iter < cfg.max_iter; ++iter) {
            const double gnorm = grad.norm();
            if (gnorm <= cfg.tol)
                break;
            if (iter > 0) {
                const double sy = s.dot(yv);
                step = sy > 0.0 ? s.squaredNorm() / sy : 1.0 / std::max(1.0, gnorm);
                step = std::clamp(step, 1e-10, 1e10);
            }
            double t = step;
            Eigen::VectorXd theta_new;
            double f_new = 0.0;
            const double gg = grad.squaredNorm();
            while (true) {
                theta_new = theta - t * grad;
                f_new = logistic_objective(X, y, theta_new, cfg.l2, &grad_new);
                if (f_new <= f - 1e-4 * t * gg || t < 1e-16)
                    break;
                t *= 0.5;
            }
            s = theta_new - theta;
            yv = grad_new - grad;
            theta = std::move(theta_new);
            grad = grad_new;
            f = f_new;
        }

        m.w_ = theta.head(ds.dim());
        m.b_ = theta(ds.dim());
        return m;
    }

private:
    void check_dim(const Eigen::VectorXd& x) const
    {
        if (x.size() != dim_)
            throw std::invalid_argument("classifier: query has dimension "
                                        + std::to_string(x.size()) + ", model expects "
                                        + std::to_string(dim_));
    }

    //! Fraction of the k nearest training points labeled 1, skipping the
    //! training position `exclude` (pass -1 to use all points). Distance
    //! ties break toward the lower index.
    double vote_fraction(const Eigen::VectorXd& x, int exclude) const
    {
        std::vector<std::pair<double, int>> order;
        order.reserve(train_X_.rows());
        for (int i = 0; i < train_X_.rows(); ++i) {
            if (i == exclude)
                continue;
            order.emplace_back((train_X_.row(i).transpose() - x).squaredNorm(), i);
        }
        const int kk = std::min<int>(k_, static_cast<int>(order.size()));
        std::nth_element(order.begin(), order.begin() + (kk - 1), order.end());
        int ones = 0;
        for (int i = 0; i < kk; ++i)
            ones += train_y_(order[i].second);
        return static_cast<double>(ones) / kk;
    }

    ClassifierKind kind_ = ClassifierKind::knn;
    int dim_ = 0;
    bool degenerate_ = false;
    int constant_label_ = 1;
    // knn state
    Eigen::MatrixXd train_X_;
    Eigen::VectorXi train_y_;
    int k_ = 5;
    // logistic state
    Eigen::VectorXd w_;
    double b_ = 0.0;
    std::vector<int> training_indices_;
};

//! Fits the configured classifier on the rows of `ds` listed in `labeled`.
inline ClassifierModel fit(const Dataset& ds, const std::vector<int>& labeled,
                           const ClassifierConfig& cfg)
{
    switch (cfg.kind) {
    case ClassifierKind::knn: return ClassifierModel::fit_knn(ds, labeled, cfg.k);
    case ClassifierKind::logistic: return ClassifierModel::fit_logistic(ds, labeled, cfg);
    }
    throw std::logic_error("fit: unknown classifier kind");
}

//! Mean 0/1 loss of `m` over the rows listed in `test`.
inline double empirical_risk(const ClassifierModel& m, const Dataset& ds,
                             const std::vector<int>& test)
{
    if (test.empty())
        throw std::invalid_argument("empirical_risk: test set is empty");
    int errors = 0;
    for (int i : test)
        errors += zero_one_loss(ds.labels(i), m.predict(ds.features.row(i).transpose()));
    return static_cast<double>(errors) / static_cast<double>(test.size());
}

} // namespace alrisk
