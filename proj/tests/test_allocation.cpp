#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/allocation.hpp"
#include "plab/correlation.hpp"
#include "plab/error.hpp"
#include "support.hpp"

#include <algorithm>
#include <numeric>

using namespace plab;

namespace
{
    // Inverse-variance split of each ordered list, written directly over index vectors.
    void oracle_bisect(const Eigen::MatrixXd &cov, std::vector<Index> items, Eigen::VectorXd &w)
    {
        if (items.size() < 2)
            return;
        const std::size_t half = (items.size() + 1) / 2;
        std::vector<Index> left(items.begin(), items.begin() + static_cast<long>(half));
        std::vector<Index> right(items.begin() + static_cast<long>(half), items.end());
        auto var = [&](const std::vector<Index> &s) {
            Eigen::VectorXd iv(s.size());
            for (std::size_t a = 0; a < s.size(); ++a)
                iv(static_cast<Index>(a)) = 1.0 / cov(s[a], s[a]);
            iv /= iv.sum();
            Eigen::MatrixXd sub(s.size(), s.size());
            for (std::size_t a = 0; a < s.size(); ++a)
                for (std::size_t b = 0; b < s.size(); ++b)
                    sub(static_cast<Index>(a), static_cast<Index>(b)) = cov(s[a], s[b]);
            return iv.dot(sub * iv);
        };
        const double vl = var(left), vr = var(right);
        for (Index i : left)
            w(i) *= vr / (vl + vr);
        for (Index i : right)
            w(i) *= vl / (vl + vr);
        oracle_bisect(cov, left, w);
        oracle_bisect(cov, right, w);
    }

    bool is_permutation(std::vector<Index> v, Index n)
    {
        std::sort(v.begin(), v.end());
        std::vector<Index> expect(static_cast<std::size_t>(n));
        std::iota(expect.begin(), expect.end(), 0);
        return v == expect;
    }
}

TEST_CASE("ivp examples")
{
    CHECK(ivp_weights(Eigen::Vector2d(1, 1)).values.isApprox(Eigen::Vector2d(0.5, 0.5)));
    const Eigen::VectorXd w = ivp_weights(Eigen::Vector3d(1, 2, 4)).values;
    CHECK(w(0) == doctest::Approx(4.0 / 7));
    CHECK(w(1) == doctest::Approx(2.0 / 7));
    CHECK(w(2) == doctest::Approx(1.0 / 7));
    CHECK_THROWS_AS(ivp_weights(Eigen::Vector2d(1, 0)), DegenerateError);
    CHECK_THROWS_AS(ivp_weights(Eigen::VectorXd()), DimensionError);
}

TEST_CASE("ivp is scale invariant and valid")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        Eigen::VectorXd s(7);
        for (Index i = 0; i < 7; ++i)
            s(i) = u(rng);
        const Eigen::VectorXd a = ivp_weights(s).values;
        const Eigen::VectorXd b = ivp_weights(s * u(rng)).values;
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(weights_valid(a));
    }
}

TEST_CASE("hrp distance")
{
    CorrelationMatrix c{Eigen::Matrix3d::Identity()};
    c.values(0, 1) = c.values(1, 0) = 1.0;
    c.values(0, 2) = c.values(2, 0) = -1.0;
    const Eigen::MatrixXd d = hrp_distance(c);
    CHECK(d(0, 1) == 0.0);
    CHECK(d(0, 2) == doctest::Approx(1.0));
    CHECK(d(0, 0) == 0.0);
    c.values(1, 2) = c.values(2, 1) = 0.0;
    CHECK(hrp_distance(c)(1, 2) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("single linkage hand trace")
{
    Eigen::Matrix3d d;
    d << 0, 0.1, 0.9, 0.1, 0, 0.8, 0.9, 0.8, 0;
    const Linkage t = single_linkage(d);
    REQUIRE(t.size() == 2);
    CHECK(t[0].left == 0);
    CHECK(t[0].right == 1);
    CHECK(t[0].distance == 0.1);
    CHECK(t[0].size == 2);
    CHECK(t[1].left == 3);
    CHECK(t[1].right == 2);
    CHECK(t[1].distance == 0.8);
    CHECK(t[1].size == 3);
    CHECK(quasi_diagonalize(t) == std::vector<Index>{0, 1, 2});

    const Linkage two = single_linkage(Eigen::Matrix2d{{0, 0.3}, {0.3, 0}});
    REQUIRE(two.size() == 1);
    CHECK(quasi_diagonalize(two) == std::vector<Index>{0, 1});

    CHECK_THROWS_AS(single_linkage(Eigen::MatrixXd::Zero(1, 1)), DimensionError);
    CHECK_THROWS_AS(single_linkage(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST_CASE("single linkage ties merge in index order")
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 4, 0.5);
    d.diagonal().setZero();
    const Linkage t = single_linkage(d);
    REQUIRE(t.size() == 3);
    CHECK(t[0].left == 0);
    CHECK(t[0].right == 1);
    CHECK(t[1].left == 4);
    CHECK(t[1].right == 2);
    CHECK(t[2].left == 5);
    CHECK(t[2].right == 3);
    CHECK(quasi_diagonalize(t) == std::vector<Index>{0, 1, 2, 3});
}

TEST_CASE("quasi diagonalization is a permutation")
{
    std::mt19937_64 rng(12);
    for (Index n = 2; n <= 20; ++n)
    {
        const Eigen::MatrixXd x = test::random_matrix(n, n, rng);
        Eigen::MatrixXd d(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                d(i, j) = (x.row(i) - x.row(j)).norm();
        const Linkage t = single_linkage(d);
        CHECK(static_cast<Index>(t.size()) == n - 1);
        CHECK(t.back().size == n);
        for (std::size_t k = 1; k < t.size(); ++k)
            CHECK(t[k].distance >= t[k - 1].distance);
        CHECK(is_permutation(quasi_diagonalize(t), n));
    }
}

TEST_CASE("recursive bisection")
{
    const std::vector<Index> order2{0, 1};
    CovarianceMatrix two{Eigen::Vector2d(1.0, 3.0).asDiagonal()};
    const Eigen::VectorXd w2 = recursive_bisection(two, order2).values;
    CHECK(w2(0) == doctest::Approx(0.75));
    CHECK(w2(1) == doctest::Approx(0.25));

    const std::vector<Index> order4{0, 1, 2, 3};
    CovarianceMatrix id{Eigen::MatrixXd::Identity(4, 4)};
    CHECK(recursive_bisection(id, order4).values.isApprox(Eigen::VectorXd::Constant(4, 0.25)));

    // Halves {0,1} | {2}: left cluster variance 2/3, right 4, so the left gets 6/7.
    const std::vector<Index> order3{0, 1, 2};
    CovarianceMatrix three{Eigen::Vector3d(1.0, 2.0, 4.0).asDiagonal()};
    const Eigen::VectorXd w3 = recursive_bisection(three, order3).values;
    CHECK(w3(0) == doctest::Approx(4.0 / 7));
    CHECK(w3(1) == doctest::Approx(2.0 / 7));
    CHECK(w3(2) == doctest::Approx(1.0 / 7));

    CovarianceMatrix zero{Eigen::MatrixXd::Zero(2, 2)};
    CHECK_THROWS_AS(recursive_bisection(zero, order2), DegenerateError);
    const std::vector<Index> bad{0, 0};
    CHECK_THROWS_AS(recursive_bisection(two, bad), DimensionError);
}

TEST_CASE("hrp matches the direct oracle")
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial)
    {
        const Index n = 2 + trial % 9;
        const ReturnMatrix r = test::random_returns(80, n, rng);
        const CovarianceMatrix cov = covariance(r);
        const CorrelationMatrix corr = pearson_corr(cov);
        const Weights w = hrp_weights(cov, corr);
        CHECK(w.scheme == SchemeKind::hrp);
        CHECK(weights_valid(w.values));

        const std::vector<Index> order = quasi_diagonalize(single_linkage(hrp_distance(corr)));
        Eigen::VectorXd expect = Eigen::VectorXd::Ones(n);
        oracle_bisect(cov.values, order, expect);
        CHECK((w.values - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("hrp special cases")
{
    CovarianceMatrix id{Eigen::MatrixXd::Identity(4, 4)};
    CorrelationMatrix cid{Eigen::MatrixXd::Identity(4, 4)};
    CHECK(hrp_weights(id, cid).values.isApprox(Eigen::VectorXd::Constant(4, 0.25)));

    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial)
    {
        const ReturnMatrix r = test::random_returns(50, 2, rng);
        const CovarianceMatrix cov = covariance(r);
        const Eigen::VectorXd hrp = hrp_weights(cov, pearson_corr(cov)).values;
        const Eigen::VectorXd ivp = ivp_weights(cov.values.diagonal()).values;
        CHECK((hrp - ivp).cwiseAbs().maxCoeff() < 1e-12);
    }

    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        Eigen::VectorXd v(9);
        for (Index i = 0; i < 9; ++i)
            v(i) = u(rng);
        CovarianceMatrix cov{v.asDiagonal()};
        const Eigen::VectorXd w = hrp_weights(cov, pearson_corr(cov)).values;
        CHECK(w.minCoeff() > 0.0);
        CHECK(weights_valid(w));
    }

    CHECK_THROWS_AS(hrp_weights(id, CorrelationMatrix{Eigen::MatrixXd::Identity(3, 3)}), DimensionError);
}
