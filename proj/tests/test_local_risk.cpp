#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace alrisk;

namespace {

Eigen::MatrixXd col(std::initializer_list<double> xs)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs)
        m(i++, 0) = x;
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> xs)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v(i++) = x;
    return v;
}

} // namespace

TEST_CASE("gaussian kernel hand values", "[local_risk]")
{
    const Eigen::VectorXd zero = vec({ 0.0 });
    REQUIRE(gaussian_kernel(zero, zero, 3.7) == 1.0);
    REQUIRE(gaussian_kernel(zero, vec({ 1.0 }), 1.0)
            == Catch::Approx(0.36787944117144233).margin(1e-16));
    REQUIRE(gaussian_kernel(zero, vec({ 1.0 }), 4.0)
            == Catch::Approx(std::exp(-0.25)).margin(1e-16));

    Eigen::VectorXd a(2), b(2);
    a << 0.0, 0.0;
    b << 3.0, 4.0;
    REQUIRE(gaussian_kernel(a, b, 25.0) == Catch::Approx(std::exp(-1.0)).margin(1e-16));

    REQUIRE_THROWS_AS(gaussian_kernel(zero, zero, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_kernel(zero, zero, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_kernel(a, zero, 1.0), std::invalid_argument);
}

TEST_CASE("pairwise squared distances match a direct loop", "[local_risk]")
{
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int na = 1 + static_cast<int>(gen() % 12);
        const int nb = 1 + static_cast<int>(gen() % 12);
        const int d = 1 + static_cast<int>(gen() % 5);
        Eigen::MatrixXd A(na, d), B(nb, d);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < d; ++j)
                A(i, j) = g(gen);
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < d; ++j)
                B(i, j) = g(gen);

        const Eigen::MatrixXd D2 = detail::pairwise_sq_dists(A, B);
        REQUIRE(D2.rows() == na);
        REQUIRE(D2.cols() == nb);
        REQUIRE(D2.minCoeff() >= 0.0);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j)
                REQUIRE(D2(i, j)
                        == Catch::Approx((A.row(i) - B.row(j)).squaredNorm())
                               .margin(1e-10));
    }
    const Eigen::MatrixXd X = col({ 1.0, 1.0, 2.0 });
    const Eigen::MatrixXd S = detail::pairwise_sq_dists(X, X);
    REQUIRE(S(0, 0) == 0.0);
    REQUIRE(S(0, 1) == 0.0);
    REQUIRE(S(0, 2) == Catch::Approx(1.0));
}

TEST_CASE("median pairwise squared distance", "[local_risk]")
{
    REQUIRE(detail::median_pairwise_sq_dist(col({ 0.0, 3.0 })) == Catch::Approx(9.0));
    // pairs of {0,1,3}: 1, 9, 4 -> median 4
    REQUIRE(detail::median_pairwise_sq_dist(col({ 0.0, 1.0, 3.0 })) == Catch::Approx(4.0));
    // pairs of {0,1,2,4}: 1,4,16,1,9,4 -> sorted 1,1,4,4,9,16 -> mean of middles 4
    REQUIRE(detail::median_pairwise_sq_dist(col({ 0.0, 1.0, 2.0, 4.0 }))
            == Catch::Approx(4.0));
    REQUIRE(detail::median_pairwise_sq_dist(col({ 5.0 })) == 1.0);
}

TEST_CASE("default grid spans factors of the median distance", "[local_risk]")
{
    const Eigen::MatrixXd X = col({ 0.0, 1.0, 3.0 }); // median sq dist 4
    const BandwidthGrid g = default_grid(X);
    REQUIRE(g.values.size() == 16);
    REQUIRE(g.values.front() == Catch::Approx(0.04).margin(1e-15));
    REQUIRE(g.values.back() == Catch::Approx(400.0).margin(1e-12));
    for (std::size_t i = 1; i < g.values.size(); ++i)
        REQUIRE(g.values[i] > g.values[i - 1]);
    // log-spacing: constant ratio between neighbors
    const double r0 = g.values[1] / g.values[0];
    for (std::size_t i = 2; i < g.values.size(); ++i)
        REQUIRE(g.values[i] / g.values[i - 1] == Catch::Approx(r0).epsilon(1e-10));

    SECTION("degenerate anchors fall back to 1")
    {
        const BandwidthGrid one_row = default_grid(col({ 7.0 }));
        REQUIRE(one_row.values.front() == Catch::Approx(0.01));
        REQUIRE(one_row.values.back() == Catch::Approx(100.0));
        const BandwidthGrid dup_rows = default_grid(col({ 7.0, 7.0 }));
        REQUIRE(dup_rows.values.front() == Catch::Approx(0.01));
    }
    SECTION("custom factors and size")
    {
        const BandwidthGrid g2 = default_grid(X, 1e-1, 1e1, 5);
        REQUIRE(g2.values.size() == 5);
        REQUIRE(g2.values.front() == Catch::Approx(0.4));
        REQUIRE(g2.values.back() == Catch::Approx(40.0));
    }
}

TEST_CASE("bandwidth grid validation", "[local_risk]")
{
    REQUIRE_THROWS_AS(BandwidthGrid(std::vector<double>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(BandwidthGrid({ 1.0, 0.0 }), std::invalid_argument);
    REQUIRE_THROWS_AS(BandwidthGrid({ -1.0 }), std::invalid_argument);
    REQUIRE_THROWS_AS(BandwidthGrid({ 1.0, 2.0, 2.0 }), std::invalid_argument);
    REQUIRE_NOTHROW(BandwidthGrid({ 0.5, 1.0, 8.0 }));

    REQUIRE_THROWS_AS(BandwidthGrid::logspace(0.0, 1.0, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(BandwidthGrid::logspace(2.0, 1.0, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(BandwidthGrid::logspace(1.0, 2.0, 0), std::invalid_argument);
    REQUIRE(BandwidthGrid::logspace(3.0, 9.0, 1).values == std::vector<double>{ 3.0 });
}

TEST_CASE("nadaraya-watson hand cases", "[local_risk]")
{
    const Eigen::MatrixXd XL = col({ 0.0, 2.0 });
    const Eigen::VectorXd losses = vec({ 0.0, 1.0 });

    SECTION("equidistant query averages the losses")
    {
        for (double h : { 0.1, 1.0, 50.0 })
            REQUIRE(nw_estimate(vec({ 1.0 }), XL, losses, h) == Catch::Approx(0.5));
    }
    SECTION("query at a training point with unit bandwidth")
    {
        // weights (1, e^-4): estimate = e^-4 / (1 + e^-4)
        const double expected = std::exp(-4.0) / (1.0 + std::exp(-4.0));
        REQUIRE(nw_estimate(vec({ 0.0 }), XL, losses, 1.0)
                == Catch::Approx(expected).margin(1e-15));
    }
    SECTION("estimate leans toward the nearer point")
    {
        REQUIRE(nw_estimate(vec({ 0.5 }), XL, losses, 1.0) < 0.5);
        REQUIRE(nw_estimate(vec({ 1.5 }), XL, losses, 1.0) > 0.5);
    }
    SECTION("all weights underflow: unweighted mean loss")
    {
        const Eigen::MatrixXd far = col({ 0.0, 1000.0 });
        const Eigen::VectorXd fl = vec({ 1.0, 0.0 });
        REQUIRE(nw_estimate(vec({ 500.0 }), far, fl, 1.0) == 0.5);
    }
    SECTION("argument validation")
    {
        REQUIRE_THROWS_AS(nw_estimate(vec({ 0.0 }), Eigen::MatrixXd(0, 1), losses, 1.0),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(nw_estimate(vec({ 0.0 }), XL, vec({ 1.0 }), 1.0),
                          std::invalid_argument);
    }
}

TEST_CASE("nadaraya-watson stays within the loss range and matches brute force",
          "[local_risk]")
{
    std::mt19937_64 gen(9);
    std::normal_distribution<double> g(0.0, 2.0);
    std::uniform_real_distribution<double> uh(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 15);
        const int d = 1 + static_cast<int>(gen() % 4);
        Eigen::MatrixXd XL(n, d);
        Eigen::VectorXd losses(n);
        for (int i = 0; i < n; ++i) {
            losses(i) = static_cast<double>(gen() % 2);
            for (int j = 0; j < d; ++j)
                XL(i, j) = g(gen);
        }
        Eigen::VectorXd q(d);
        for (int j = 0; j < d; ++j)
            q(j) = g(gen);
        const double h = std::pow(10.0, uh(gen));
        const double v = nw_estimate(q, XL, losses, h);
        REQUIRE(v >= losses.minCoeff());
        REQUIRE(v <= losses.maxCoeff());
        REQUIRE(v == Catch::Approx(testutil::brute_nw(q, XL, losses, h)).margin(1e-12));
    }
}

TEST_CASE("loss vector", "[local_risk]")
{
    Dataset ds;
    ds.features = col({ 0.0, 1.0, 2.0, 3.0 });
    ds.labels.resize(4);
    ds.labels << 0, 1, 0, 1;
    ds.feature_names = { "x" };
    const std::vector<int> L = { 0, 1, 2, 3 };

    SECTION("resubstitution with 1-nn is all zeros")
    {
        const ClassifierModel m = ClassifierModel::fit_knn(ds, L, 1);
        const Eigen::VectorXd v = loss_vector(m, ds, L, LossMode::resubstitution);
        REQUIRE(v.size() == 4);
        REQUIRE(v.maxCoeff() == 0.0);
    }
    SECTION("leave-one-out with 1-nn scores against the nearest other point")
    {
        const ClassifierModel m = ClassifierModel::fit_knn(ds, L, 1);
        const Eigen::VectorXd v = loss_vector(m, ds, L, LossMode::leave_one_out);
        // alternating labels: every point's nearest other neighbor disagrees,
        // except ties resolved by index keep the pattern; recompute by hand:
        // x=0 -> neighbor x=1 (label 1) -> loss 1
        // x=1 -> neighbors x=0,x=2 tie -> lower index x=0 (label 0) -> loss 1
        // x=2 -> neighbors x=1,x=3 tie -> lower index x=1 (label 1) -> loss 1
        // x=3 -> neighbor x=2 (label 0) -> loss 1
        REQUIRE(v.minCoeff() == 1.0);
    }
    SECTION("leave-one-out rejects logistic models and tiny sets")
    {
        ClassifierConfig cfg;
        cfg.kind = ClassifierKind::logistic;
        const ClassifierModel lm = fit(ds, L, cfg);
        REQUIRE_THROWS_AS(loss_vector(lm, ds, L, LossMode::leave_one_out),
                          std::invalid_argument);
        const ClassifierModel m = ClassifierModel::fit_knn(ds, { 0 }, 1);
        REQUIRE_THROWS_AS(loss_vector(m, ds, { 0 }, LossMode::leave_one_out),
                          std::invalid_argument);
    }
}

TEST_CASE("loocv objective hand cases", "[local_risk]")
{
    SECTION("two points: held-out estimate is always the other loss")
    {
        const Eigen::MatrixXd XL = col({ 0.0, 1.0 });
        const Eigen::VectorXd losses = vec({ 0.0, 1.0 });
        for (double h : { 1e-3, 1.0, 1e3 })
            REQUIRE(loocv_objective(XL, losses, h) == Catch::Approx(1.0));
    }
    SECTION("three points, unit bandwidth")
    {
        const Eigen::MatrixXd XL = col({ 0.0, 1.0, 2.0 });
        const Eigen::VectorXd losses = vec({ 0.0, 1.0, 0.0 });
        // j=0: est = e^-1/(e^-1 + e^-4); j=1: est = 0; j=2 mirrors j=0
        const double s = std::exp(-1.0) / (std::exp(-1.0) + std::exp(-4.0));
        const double expected = (2.0 * s * s + 1.0) / 3.0;
        REQUIRE(loocv_objective(XL, losses, 1.0)
                == Catch::Approx(expected).margin(1e-12));
    }
    SECTION("needs at least two points")
    {
        REQUIRE_THROWS_AS(loocv_objective(col({ 0.0 }), vec({ 1.0 }), 1.0),
                          std::invalid_argument);
    }
}

TEST_CASE("loocv objective matches a direct reimplementation", "[local_risk]")
{
    std::mt19937_64 gen(23);
    std::normal_distribution<double> g(0.0, 1.5);
    std::uniform_real_distribution<double> uh(-3.0, 3.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 20);
        const int d = 1 + static_cast<int>(gen() % 4);
        Eigen::MatrixXd XL(n, d);
        Eigen::VectorXd losses(n);
        for (int i = 0; i < n; ++i) {
            losses(i) = static_cast<double>(gen() % 2);
            for (int j = 0; j < d; ++j)
                XL(i, j) = g(gen);
        }
        const double h = std::pow(10.0, uh(gen));
        REQUIRE(loocv_objective(XL, losses, h)
                == Catch::Approx(testutil::brute_loocv_objective(XL, losses, h))
                       .margin(1e-9));
    }
}

TEST_CASE("loocv smallest-h tie rule", "[local_risk]")
{
    // with two points E(h) is flat in h, so every grid value ties
    const Eigen::MatrixXd XL = col({ 0.0, 1.0 });
    const Eigen::VectorXd losses = vec({ 0.0, 1.0 });
    const BandwidthGrid grid({ 0.25, 1.0, 4.0, 16.0 });
    REQUIRE(loocv_bandwidth(XL, losses, grid) == 0.25);
}

TEST_CASE("loocv bandwidth matches brute-force argmin", "[local_risk]")
{
    std::mt19937_64 gen(41);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(gen() % 18);
        const int d = 1 + static_cast<int>(gen() % 3);
        Eigen::MatrixXd XL(n, d);
        Eigen::VectorXd losses(n);
        for (int i = 0; i < n; ++i) {
            losses(i) = static_cast<double>(gen() % 2);
            for (int j = 0; j < d; ++j)
                XL(i, j) = g(gen);
        }
        const BandwidthGrid grid = default_grid(XL);
        REQUIRE(loocv_bandwidth(XL, losses, grid)
                == testutil::brute_loocv_bandwidth(XL, losses, grid.values));
    }
}

TEST_CASE("risk field assembles the full pipeline", "[local_risk]")
{
    const Dataset ds = testutil::synthetic_blobs(60, 2, 19);
    const IndexPartition part = make_partition(ds, 12, 0.3, 7);
    const ClassifierModel m = ClassifierModel::fit_knn(ds, part.labeled, 3);
    const BandwidthGrid grid = default_grid(rows_at(ds, part.labeled));
    const RiskField f = risk_field(m, part, ds, grid, LossMode::leave_one_out);

    REQUIRE(f.pool == part.unlabeled);
    REQUIRE(f.labeled == part.labeled);
    REQUIRE(f.values.size() == static_cast<Eigen::Index>(part.unlabeled.size()));
    REQUIRE(f.losses.size() == static_cast<Eigen::Index>(part.labeled.size()));
    REQUIRE(std::find(grid.values.begin(), grid.values.end(), f.bandwidth)
            != grid.values.end());
    REQUIRE(f.values.minCoeff() >= 0.0);
    REQUIRE(f.values.maxCoeff() <= 1.0);

    SECTION("values match per-point estimates")
    {
        const Eigen::MatrixXd XL = rows_at(ds, part.labeled);
        const Eigen::VectorXd losses =
            loss_vector(m, ds, part.labeled, LossMode::leave_one_out);
        REQUIRE((losses - f.losses).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(f.bandwidth == loocv_bandwidth(XL, losses, grid));
        for (Eigen::Index i = 0; i < f.values.size(); ++i) {
            const Eigen::VectorXd q = ds.features.row(f.pool[i]).transpose();
            REQUIRE(f.values(i)
                    == Catch::Approx(nw_estimate(q, XL, losses, f.bandwidth))
                           .margin(1e-9));
        }
    }
    SECTION("zero-loss training data yields a zero field")
    {
        const ClassifierModel one_nn = ClassifierModel::fit_knn(ds, part.labeled, 1);
        const RiskField z = risk_field(one_nn, part, ds, grid, LossMode::resubstitution);
        REQUIRE(z.values.maxCoeff() == 0.0);
    }
    SECTION("underflowing bandwidth falls back to the mean loss everywhere")
    {
        const BandwidthGrid tiny(std::vector<double>{ 1e-300 });
        const RiskField u = risk_field(m, part, ds, tiny, LossMode::leave_one_out);
        const double mean_loss = u.losses.mean();
        for (Eigen::Index i = 0; i < u.values.size(); ++i)
            REQUIRE(u.values(i) == mean_loss);
    }
    SECTION("needs at least two labeled points")
    {
        IndexPartition small = part;
        small.labeled = { part.labeled[0] };
        REQUIRE_THROWS_AS(risk_field(m, small, ds, grid, LossMode::resubstitution),
                          std::invalid_argument);
    }
}
