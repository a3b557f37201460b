#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/correlation.hpp"
#include "plab/error.hpp"
#include "support.hpp"

#include <cmath>

using namespace plab;

namespace
{
    // Straightforward DCCA: explicit profiles, per-box least squares through
    // a QR solve, residual products averaged over boxes.
    double dcca_oracle(const std::vector<double> &x, const std::vector<double> &y, int n)
    {
        const int t = static_cast<int>(x.size());
        auto profile = [&](const std::vector<double> &s) {
            double mean = 0.0;
            for (double v : s)
                mean += v;
            mean /= t;
            std::vector<double> p(t);
            double acc = 0.0;
            for (int k = 0; k < t; ++k)
                p[k] = acc += s[k] - mean;
            return p;
        };
        const auto px = profile(x);
        const auto py = profile(y);
        Eigen::MatrixXd design(n + 1, 2);
        for (int k = 0; k <= n; ++k)
        {
            design(k, 0) = 1.0;
            design(k, 1) = k;
        }
        const auto qr = design.colPivHouseholderQr();
        double fxy = 0.0, fxx = 0.0, fyy = 0.0;
        for (int j = 0; j < t - n; ++j)
        {
            Eigen::VectorXd bx(n + 1), by(n + 1);
            for (int k = 0; k <= n; ++k)
            {
                bx(k) = px[j + k];
                by(k) = py[j + k];
            }
            const Eigen::VectorXd rx = bx - design * qr.solve(bx);
            const Eigen::VectorXd ry = by - design * qr.solve(by);
            fxy += rx.dot(ry) / (n + 1);
            fxx += rx.squaredNorm() / (n + 1);
            fyy += ry.squaredNorm() / (n + 1);
        }
        return fxy / std::sqrt(fxx * fyy);
    }
}

TEST_CASE("sample covariance")
{
    ReturnMatrix w{Eigen::MatrixXd(3, 2), default_labels(2)};
    w.values << 1, 2, 2, 4, 3, 6;
    const CovarianceMatrix c = covariance(w);
    CHECK(c.values(0, 1) == doctest::Approx(2.0));
    CHECK(c.values(1, 0) == c.values(0, 1));
    CHECK(c.values(0, 0) == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    ReturnMatrix r = test::random_returns(50, 3, rng);
    r.values.col(1) = r.values.col(0);
    r.values.col(2).setConstant(0.01);
    const CovarianceMatrix d = covariance(r, 7);
    CHECK(d.window_start == 7);
    CHECK(d.window_end == 57);
    CHECK(d.values(0, 1) == doctest::Approx(d.values(0, 0)).epsilon(1e-14));
    CHECK(d.values.row(2).cwiseAbs().maxCoeff() < 1e-20);
    CHECK_THROWS_AS(covariance(r.slice(0, 1)), InsufficientDataError);
}

TEST_CASE("covariance ignores per-column shifts and is positive semidefinite")
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial)
    {
        const ReturnMatrix r = test::random_returns(40, 6, rng);
        ReturnMatrix shifted = r;
        for (Index c = 0; c < 6; ++c)
            shifted.values.col(c).array() += 0.1 * static_cast<double>(c + 1);
        const Eigen::MatrixXd a = covariance(r).values;
        const Eigen::MatrixXd b = covariance(shifted).values;
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * a.cwiseAbs().maxCoeff());
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues();
        CHECK(ev.minCoeff() >= -1e-10 * ev.maxCoeff());
        CHECK(a == a.transpose());
    }
}

TEST_CASE("pearson correlation")
{
    CovarianceMatrix c{Eigen::MatrixXd(2, 2)};
    c.values << 4, 2, 2, 4;
    const CorrelationMatrix p = pearson_corr(c);
    CHECK(p.kind == MetricKind::pearson);
    CHECK(p.values(0, 1) == doctest::Approx(0.5));
    CHECK(p.values(0, 0) == 1.0);

    CovarianceMatrix diag{Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal()};
    CHECK(pearson_corr(diag).values == Eigen::Matrix3d::Identity());

    CovarianceMatrix degenerate{Eigen::Vector3d(1.0, 0.0, 3.0).asDiagonal()};
    const std::vector<std::string> labels{"AAA", "BBB", "CCC"};
    try
    {
        pearson_corr(degenerate, labels);
        FAIL("expected a degenerate-asset error");
    }
    catch (const DegenerateError &e)
    {
        CHECK(e.asset() == "BBB");
    }

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CorrelationMatrix q = pearson_corr(covariance(test::random_returns(30, 5, rng)));
        CHECK(correlation_valid(q.values));
    }
}

TEST_CASE("dcca of a series with itself and its negation")
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto x = test::column(test::random_matrix(300, 1, rng), 0);
        std::vector<double> neg(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            neg[i] = -x[i];
        CHECK(std::abs(dcca_pair(x, x, 20) - 1.0) <= 1e-12);
        CHECK(std::abs(dcca_pair(x, neg, 20) + 1.0) <= 1e-12);
    }
}

TEST_CASE("dcca matches the least-squares oracle")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial)
    {
        const ReturnMatrix r = test::random_returns(150, 4, rng);
        const CorrelationMatrix m = dcca_matrix(r, 12);
        CHECK(m.kind == MetricKind::dcca);
        REQUIRE(m.box_length.has_value());
        CHECK(*m.box_length == 12);
        CHECK(correlation_valid(m.values));
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < 4; ++j)
            {
                const auto x = test::column(r.values, i);
                const auto y = test::column(r.values, j);
                const double oracle = i == j ? 1.0 : dcca_oracle(x, y, 12);
                CHECK(m.values(i, j) == doctest::Approx(oracle).epsilon(1e-10));
                CHECK(dcca_pair(x, y, 12) == doctest::Approx(oracle).epsilon(1e-10));
            }
    }
}

TEST_CASE("dcca symmetry and scale invariance")
{
    std::mt19937_64 rng(6);
    const ReturnMatrix r = test::random_returns(200, 2, rng);
    const auto x = test::column(r.values, 0);
    const auto y = test::column(r.values, 1);
    const double base = dcca_pair(x, y, 15);
    CHECK(dcca_pair(y, x, 15) == doctest::Approx(base).epsilon(1e-13));
    std::vector<double> ax(x), by(y);
    for (auto &v : ax)
        v *= 3.5;
    for (auto &v : by)
        v *= -0.2;
    CHECK(dcca_pair(ax, by, 15) == doctest::Approx(-base).epsilon(1e-12));
}

TEST_CASE("independent series have small dcca")
{
    std::mt19937_64 rng(7);
    int small = 0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const ReturnMatrix r = test::random_returns(2000, 2, rng, 1.0);
        if (std::abs(dcca_pair(test::column(r.values, 0), test::column(r.values, 1), 60)) < 0.15)
            ++small;
    }
    CHECK(small >= 95);
}

TEST_CASE("dcca preconditions")
{
    std::mt19937_64 rng(8);
    const ReturnMatrix r = test::random_returns(60, 32, rng);
    CHECK_THROWS_AS(dcca_matrix(r, 60), InsufficientDataError);
    CHECK_THROWS_AS(dcca_matrix(test::random_returns(61, 2, rng), 60), InsufficientDataError);
    CHECK_NOTHROW(dcca_matrix(test::random_returns(62, 2, rng), 60));
    CHECK_THROWS_AS(dcca_matrix(test::random_returns(62, 2, rng), 1), InsufficientDataError);

    ReturnMatrix same = test::random_returns(100, 2, rng);
    same.values.col(1) = same.values.col(0);
    const CorrelationMatrix m = dcca_matrix(same, 10);
    CHECK(m.values.isApprox(Eigen::Matrix2d::Ones(), 1e-12));

    ReturnMatrix constant = test::random_returns(100, 3, rng);
    constant.values.col(2).setConstant(0.003);
    try
    {
        dcca_matrix(constant, 10);
        FAIL("expected a degenerate-series error");
    }
    catch (const DegenerateError &e)
    {
        CHECK(e.asset() == "A2");
    }
    const auto c = test::column(constant.values, 2);
    CHECK_THROWS_AS(dcca_pair(c, test::column(constant.values, 0), 10), DegenerateError);
}

TEST_CASE("dpcca")
{
    CorrelationMatrix identity{Eigen::MatrixXd::Identity(4, 4), MetricKind::dcca, 10};
    const CorrelationMatrix p = dpcca_from_dcca(identity);
    CHECK(p.kind == MetricKind::dpcca);
    CHECK(p.values.isApprox(Eigen::MatrixXd::Identity(4, 4)));

    for (double r : {-0.8, -0.3, 0.0, 0.4, 0.95})
    {
        CorrelationMatrix two{Eigen::Matrix2d::Identity(), MetricKind::dcca, 10};
        two.values(0, 1) = two.values(1, 0) = r;
        CHECK(dpcca_from_dcca(two).values(0, 1) == doctest::Approx(r).epsilon(1e-12));
    }

    CorrelationMatrix ones{Eigen::MatrixXd::Ones(3, 3), MetricKind::dcca, 10};
    CHECK_THROWS_AS(dpcca_from_dcca(ones), SingularityError);
    DpccaOptions ridge;
    ridge.ridge = 1e-3;
    CHECK(correlation_valid(dpcca_from_dcca(ones, ridge).values));

    // Partial correlation of a three-variable chain through the middle variable.
    CorrelationMatrix chain{Eigen::Matrix3d::Identity(), MetricKind::dcca, 10};
    chain.values(0, 1) = chain.values(1, 0) = 0.6;
    chain.values(1, 2) = chain.values(2, 1) = 0.5;
    chain.values(0, 2) = chain.values(2, 0) = 0.3;
    const double expect02 = (0.3 - 0.6 * 0.5) / std::sqrt((1 - 0.36) * (1 - 0.25));
    CHECK(dpcca_from_dcca(chain).values(0, 2) == doctest::Approx(expect02).epsilon(1e-12));
}

TEST_CASE("two-asset dpcca equals dcca")
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial)
    {
        const ReturnMatrix r = test::random_returns(120, 2, rng);
        const CorrelationMatrix d = dcca_matrix(r, 20);
        const CorrelationMatrix p = dpcca_matrix(r, 20);
        CHECK((d.values - p.values).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(correlation(r, MetricKind::dpcca, 20).values == p.values);
        CHECK(correlation(r, MetricKind::pearson, 20).kind == MetricKind::pearson);
    }
}
