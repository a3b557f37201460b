#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/cla.hpp"
#include "plab/error.hpp"
#include "support.hpp"

#include <algorithm>
#include <limits>

using namespace plab;

namespace
{
    struct GridPoint
    {
        Eigen::VectorXd w;
        double variance = std::numeric_limits<double>::infinity();
    };

    // Exhaustive search over the simplex on a 1e-3 lattice (N = 2 or 3).
    template <class Accept>
    GridPoint grid_min_variance(const Eigen::MatrixXd &cov, const Eigen::VectorXd &lower,
                                const Eigen::VectorXd &upper, Accept accept)
    {
        const int steps = 1000;
        const Index n = cov.rows();
        GridPoint best;
        Eigen::VectorXd w(n);
        auto consider = [&] {
            for (Index i = 0; i < n; ++i)
                if (w(i) < lower(i) - 1e-12 || w(i) > upper(i) + 1e-12)
                    return;
            if (!accept(w))
                return;
            const double v = w.dot(cov * w);
            if (v < best.variance)
                best = {w, v};
        };
        for (int a = 0; a <= steps; ++a)
        {
            if (n == 2)
            {
                w << a / double(steps), (steps - a) / double(steps);
                consider();
                continue;
            }
            for (int b = 0; a + b <= steps; ++b)
            {
                w << a / double(steps), b / double(steps), (steps - a - b) / double(steps);
                consider();
            }
        }
        return best;
    }

    // With three assets the budget and return constraints leave a segment
    // w0 + t d; minimize the quadratic in t over the part inside [0, 1]^3.
    Eigen::VectorXd line_oracle(const Eigen::MatrixXd &cov, const Eigen::Vector3d &mu, double target)
    {
        const Eigen::Vector3d d = Eigen::Vector3d::Ones().cross(mu).normalized();
        Eigen::Matrix<double, 2, 3> a;
        a.row(0).setOnes();
        a.row(1) = mu.transpose();
        const Eigen::Vector3d w0 = a.transpose() * (a * a.transpose()).inverse() * Eigen::Vector2d(1.0, target);
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
        {
            if (std::abs(d(i)) < 1e-15)
                continue;
            const double t0 = (0.0 - w0(i)) / d(i);
            const double t1 = (1.0 - w0(i)) / d(i);
            lo = std::max(lo, std::min(t0, t1));
            hi = std::min(hi, std::max(t0, t1));
        }
        const double t = std::clamp(-d.dot(cov * w0) / d.dot(cov * d), lo, hi);
        return w0 + t * d;
    }

    CovarianceMatrix cov_of(const Eigen::MatrixXd &m) { return CovarianceMatrix{m}; }
}

TEST_CASE("cla examples")
{
    const Weights eq = cla_weights(cov_of(Eigen::MatrixXd::Identity(5, 5)), Eigen::VectorXd::Constant(5, 0.01),
                                   ClaConfig::uniform(5));
    CHECK(eq.scheme == SchemeKind::cla);
    CHECK((eq.values.array() - 0.2).abs().maxCoeff() < 1e-12);

    const Eigen::Matrix2d v{{1, 0}, {0, 4}};
    const Eigen::VectorXd w = cla_weights(cov_of(v), Eigen::Vector2d(0.05, 0.05), ClaConfig::uniform(2)).values;
    CHECK(w(0) == doctest::Approx(0.8));
    CHECK(w(1) == doctest::Approx(0.2));

    const Eigen::VectorXd corner =
        cla_weights(cov_of(v), Eigen::Vector2d(0.1, 0.2), ClaConfig::uniform(2, 0.0, 1.0, 0.2)).values;
    CHECK(std::abs(corner(0)) < 1e-9);
    CHECK(corner(1) == doctest::Approx(1.0));
}

TEST_CASE("minimum variance matches the grid oracle")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int trial = 0; trial < 40; ++trial)
    {
        const Index n = 2 + trial % 2;
        const Eigen::MatrixXd cov = test::random_psd(n, n + 3, rng);
        Eigen::VectorXd mu(n);
        for (Index i = 0; i < n; ++i)
            mu(i) = u(rng);
        const ClaConfig cfg = ClaConfig::uniform(n);
        const Eigen::VectorXd w = cla_weights(cov_of(cov), mu, cfg).values;
        const GridPoint g = grid_min_variance(cov, cfg.lower_bounds, cfg.upper_bounds, [](const auto &) { return true; });
        CHECK((w - g.w).cwiseAbs().maxCoeff() <= 1e-2);
        CHECK(w.dot(cov * w) <= g.variance + 1e-12);
        CHECK(weights_valid(w));
    }
}

TEST_CASE("minimum variance respects general bounds")
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Eigen::MatrixXd cov = test::random_psd(3, 6, rng);
        ClaConfig cfg;
        cfg.lower_bounds = Eigen::Vector3d(0.1, 0.0, 0.2);
        cfg.upper_bounds = Eigen::Vector3d(0.5, 0.6, 1.0);
        const Eigen::VectorXd w = min_variance_portfolio(cov, cfg.lower_bounds, cfg.upper_bounds);
        CHECK(std::abs(w.sum() - 1.0) < 1e-9);
        CHECK(((w - cfg.lower_bounds).array() >= -1e-9).all());
        CHECK(((cfg.upper_bounds - w).array() >= -1e-9).all());
        const GridPoint g = grid_min_variance(cov, cfg.lower_bounds, cfg.upper_bounds, [](const auto &) { return true; });
        CHECK((w - g.w).cwiseAbs().maxCoeff() <= 1e-2);
    }
}

TEST_CASE("frontier turning points")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Index n = 6;
        const Eigen::MatrixXd cov = test::random_psd(n, 20, rng);
        const Eigen::VectorXd mu = test::random_matrix(n, 1, rng, 0.01);
        const Frontier f = critical_line(cov, mu, ClaConfig::uniform(n));
        REQUIRE(!f.turning_points.empty());
        CHECK(f.min_variance().lambda == 0.0);
        for (std::size_t k = 0; k < f.turning_points.size(); ++k)
        {
            const TurningPoint &p = f.turning_points[k];
            CHECK(weights_valid(p.weights));
            CHECK(p.expected_return == doctest::Approx(mu.dot(p.weights)));
            CHECK(p.variance == doctest::Approx(p.weights.dot(cov * p.weights)));
            if (k > 0)
            {
                CHECK(p.lambda > f.turning_points[k - 1].lambda);
                CHECK(p.expected_return >= f.turning_points[k - 1].expected_return - 1e-12);
                CHECK(p.variance >= f.turning_points[k - 1].variance - 1e-12);
            }
        }
        // The last efficient point holds everything in the best asset.
        Index best = 0;
        mu.maxCoeff(&best);
        CHECK(f.turning_points.back().weights(best) == doctest::Approx(1.0));
        if (!f.lower_branch.empty())
        {
            Index worst = 0;
            mu.minCoeff(&worst);
            CHECK(f.lower_branch.back().weights(worst) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("target return portfolios match the grid oracle")
{
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 10; ++trial)
    {
        const Eigen::MatrixXd cov = test::random_psd(3, 8, rng);
        const Eigen::Vector3d mu(0.01, 0.02, 0.04);
        for (double target : {0.012, 0.025, 0.035})
        {
            const Eigen::VectorXd w = cla_weights(cov_of(cov), mu, ClaConfig::uniform(3, 0.0, 1.0, target)).values;
            CHECK(mu.dot(w) == doctest::Approx(target).epsilon(1e-9));
            CHECK(weights_valid(w));
            const Eigen::VectorXd exact = line_oracle(cov, mu, target);
            CHECK((w - exact).cwiseAbs().maxCoeff() < 1e-7);
        }
    }
}

TEST_CASE("infeasible targets")
{
    const Eigen::Matrix2d cov{{1, 0}, {0, 4}};
    const Eigen::Vector2d mu(0.1, 0.2);
    CHECK_THROWS_AS(cla_weights(cov_of(cov), mu, ClaConfig::uniform(2, 0.0, 1.0, 0.25)), InfeasibleError);
    CHECK_THROWS_AS(cla_weights(cov_of(cov), mu, ClaConfig::uniform(2, 0.0, 1.0, 0.05)), InfeasibleError);
    const Eigen::VectorXd low = cla_weights(cov_of(cov), mu, ClaConfig::uniform(2, 0.0, 1.0, 0.1)).values;
    CHECK(low(0) == doctest::Approx(1.0));
}

TEST_CASE("bound validation")
{
    CHECK_NOTHROW(validate(ClaConfig::uniform(4), 4));
    CHECK_THROWS_AS(validate(ClaConfig::uniform(4), 3), ConfigError);
    CHECK_THROWS_AS(validate(ClaConfig::uniform(4, -0.1, 1.0), 4), ConfigError);
    CHECK_THROWS_AS(validate(ClaConfig::uniform(4, 0.0, 1.2), 4), ConfigError);
    CHECK_THROWS_AS(validate(ClaConfig::uniform(4, 0.3, 1.0), 4), ConfigError);
    CHECK_THROWS_AS(validate(ClaConfig::uniform(4, 0.0, 0.2), 4), ConfigError);
    CHECK_THROWS_AS(validate(ClaConfig::uniform(4, 0.5, 0.4), 4), ConfigError);
    CHECK_NOTHROW(validate(ClaConfig::uniform(4, 0.25, 0.25), 4));
    try
    {
        validate(ClaConfig::uniform(4, 0.0, 0.2), 4);
    }
    catch (const ConfigError &e)
    {
        CHECK(!e.field().empty());
    }
}

TEST_CASE("singular systems")
{
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
    CHECK_THROWS_AS(cla_weights(cov_of(ones), Eigen::Vector3d(0.01, 0.02, 0.03), ClaConfig::uniform(3, 0.0, 1.0, 0.015)),
                    SingularityError);
    CHECK_THROWS_AS(cla_weights(cov_of(Eigen::MatrixXd::Identity(3, 3)), Eigen::Vector2d(0.0, 0.0), ClaConfig::uniform(3)),
                    DimensionError);
}
