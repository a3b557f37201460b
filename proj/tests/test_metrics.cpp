#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/error.hpp"
#include "plab/metrics.hpp"
#include "support.hpp"

#include <algorithm>

using namespace plab;

namespace
{
    const std::vector<double> kFive{-0.10, -0.05, 0.0, 0.05, 0.10};
}

TEST_CASE("portfolio variance")
{
    CHECK(portfolio_variance(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.3, 0.7).asDiagonal().toDenseMatrix()) ==
          doctest::Approx(0.3));
    CHECK(portfolio_variance(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Ones()) == doctest::Approx(1.0));
    CHECK(portfolio_variance(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::Matrix3d::Zero()) == 0.0);
    CHECK_THROWS_AS(portfolio_variance(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::Matrix2d::Ones()), DimensionError);
}

TEST_CASE("risk contribution")
{
    const Eigen::Matrix3d cov = Eigen::Vector3d(0.04, 0.09, 0.16).asDiagonal();
    const Eigen::VectorXd single = risk_contribution(Eigen::Vector3d(1, 0, 0), cov);
    CHECK(single(0) == doctest::Approx(0.2));
    CHECK(single(1) == 0.0);

    const Eigen::VectorXd eq = risk_contribution(Eigen::VectorXd::Constant(4, 0.25), Eigen::MatrixXd::Identity(4, 4));
    CHECK((eq.array() - 0.125).abs().maxCoeff() < 1e-15);
    CHECK(eq.sum() == doctest::Approx(0.5));
    CHECK_THROWS_AS(risk_contribution(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Zero()), DegenerateError);

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial)
    {
        const Index n = 2 + trial % 10;
        const Eigen::MatrixXd s = test::random_psd(n, n + 2, rng);
        const Eigen::VectorXd w = test::random_simplex(n, rng);
        const double root = std::sqrt(portfolio_variance(w, s));
        CHECK(std::abs(risk_contribution(w, s).sum() - root) <= 1e-10);
    }
}

TEST_CASE("diversification ratio")
{
    CHECK(diversification_ratio(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.3, 0.7).asDiagonal().toDenseMatrix()) ==
          doctest::Approx(1.0));
    CHECK(diversification_ratio(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Identity() * 0.04) ==
          doctest::Approx(std::sqrt(2.0)));

    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial)
    {
        const Index n = 2 + trial % 6;
        const Eigen::VectorXd sigma = test::random_matrix(n, 1, rng).cwiseAbs().array() + 0.1;
        const Eigen::MatrixXd perfect = sigma * sigma.transpose();
        const Eigen::VectorXd w = test::random_simplex(n, rng);
        CHECK(std::abs(diversification_ratio(w, perfect) - 1.0) <= 1e-9);
        CHECK(diversification_ratio(w, test::random_psd(n, n + 3, rng)) >= 1.0 - 1e-9);
    }
}

TEST_CASE("nhhi")
{
    CHECK(nhhi(Eigen::VectorXd::Constant(5, 0.2)) == doctest::Approx(0.0));
    CHECK(nhhi(Eigen::Vector3d(0, 1, 0)) == doctest::Approx(1.0));
    CHECK(nhhi(Eigen::Vector2d(0.75, 0.25)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(nhhi(Eigen::VectorXd::Ones(1)), UndefinedError);

    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial)
    {
        Eigen::VectorXd w = test::random_simplex(8, rng);
        const double h = nhhi(w);
        CHECK(h >= 0.0);
        CHECK(h <= 1.0);
        CHECK(h > nhhi(Eigen::VectorXd::Constant(8, 0.125)));
        std::shuffle(w.data(), w.data() + w.size(), rng);
        CHECK(nhhi(w) == doctest::Approx(h).epsilon(1e-14));
    }
}

TEST_CASE("sharpe ratio")
{
    const std::vector<double> r{-0.1, 0.3};
    CHECK(mean(r) == doctest::Approx(0.1));
    CHECK(sample_std(r) == doctest::Approx(0.2 * std::sqrt(2.0)));
    // mean 0.1, sample std 0.2
    const std::vector<double> s{0.1 - 0.2 / std::sqrt(2.0), 0.1 + 0.2 / std::sqrt(2.0)};
    CHECK(sharpe_ratio(s) == doctest::Approx(0.5));
    CHECK(sharpe_ratio(s, 0.02) == doctest::Approx(0.4));
    const std::vector<double> flat(10, 0.01);
    CHECK_THROWS_AS(sharpe_ratio(flat), DegenerateError);
    std::vector<double> neg(s);
    for (auto &v : neg)
        v = -v;
    CHECK(sharpe_ratio(neg) == doctest::Approx(-sharpe_ratio(s)));
    CHECK(sample_std(std::vector<double>{0.5}) == 0.0);
}

TEST_CASE("historical var and cvar")
{
    CHECK(var_historical(kFive, 0.05) == doctest::Approx(0.10));
    CHECK(var_historical(kFive, 0.2) == doctest::Approx(0.10));
    CHECK(var_historical(kFive, 0.4) == doctest::Approx(0.05));
    CHECK(cvar_historical(kFive, 0.4) == doctest::Approx(0.075));
    CHECK(cvar_historical(kFive, 0.05) == doctest::Approx(var_historical(kFive, 0.05)));

    const std::vector<double> shuffled{0.05, -0.10, 0.10, 0.0, -0.05};
    CHECK(var_historical(shuffled, 0.4) == doctest::Approx(0.05));

    const std::vector<double> gains{0.01, 0.02, 0.03};
    CHECK(var_historical(gains, 0.05) <= 0.0);
    const std::vector<double> same(7, 0.013);
    CHECK(var_historical(same, 0.05) == doctest::Approx(-0.013));
    CHECK(cvar_historical(same, 0.05) == doctest::Approx(-0.013));

    CHECK_THROWS_AS(var_historical(std::vector<double>{}, 0.05), InsufficientDataError);
    CHECK_THROWS_AS(cvar_historical(std::vector<double>{}, 0.05), InsufficientDataError);
    CHECK_THROWS_AS(var_historical(kFive, 0.0), DomainError);
    CHECK_THROWS_AS(var_historical(kFive, 1.0), DomainError);

    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto r = test::column(test::random_matrix(50 + trial, 1, rng, 0.02), 0);
        for (double a : {0.01, 0.05, 0.1, 0.5})
            CHECK(cvar_historical(r, a) >= var_historical(r, a));
    }
}

TEST_CASE("compound log return")
{
    CHECK(compound_log_return(std::vector<double>(9, 0.0)) == 0.0);
    CHECK(compound_log_return(std::vector<double>(12, 0.03)) == doctest::Approx(12 * std::log(1.03)));
    CHECK(std::abs(compound_log_return(std::vector<double>{0.1, -1.0 / 11.0})) < 1e-15);
    CHECK_THROWS_AS(compound_log_return(std::vector<double>{0.1, -1.0}), DomainError);

    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto a = test::column(test::random_matrix(30, 1, rng, 0.02), 0);
        const auto b = test::column(test::random_matrix(17, 1, rng, 0.02), 0);
        std::vector<double> ab(a);
        ab.insert(ab.end(), b.begin(), b.end());
        CHECK(compound_log_return(ab) ==
              doctest::Approx(compound_log_return(a) + compound_log_return(b)).epsilon(1e-12));
    }
}

TEST_CASE("improvement")
{
    CHECK(improvement(0.02, 0.01) == doctest::Approx(1.0));
    CHECK(improvement(0.013, 0.013) == 0.0);
    CHECK(improvement(0.01, -0.01) == doctest::Approx(2.0));
    CHECK(improvement(-0.02, 0.01) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(improvement(0.01, 0.0), UndefinedError);
}
