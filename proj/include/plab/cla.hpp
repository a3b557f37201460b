#pragma once

#include "plab/types.hpp"

#include <optional>
#include <vector>

namespace plab
{
    struct ClaConfig
    {
        Eigen::VectorXd lower_bounds;
        Eigen::VectorXd upper_bounds;
        /// Frontier portfolio to report; absent selects the minimum-variance turning point.
        std::optional<double> target_return;

        /// Same [lower, upper] box for every one of n assets.
        static ClaConfig uniform(Index n, double lower = 0.0, double upper = 1.0,
                                 std::optional<double> target = std::nullopt);
    };

    /// 0 <= l_i <= u_i <= 1 and sum(l) <= 1 <= sum(u). Throws ConfigError.
    void validate(const ClaConfig &cfg, Index assets);

    struct TurningPoint
    {
        /// Risk-tolerance multiplier on expected return at this point.
        double lambda = 0.0;
        Eigen::VectorXd weights;
        double expected_return = 0.0;
        double variance = 0.0;
    };

    /**
     * Critical-line traversal of the box-constrained mean-variance problem
     *
     *     minimize  w' S w / 2 - lambda mu' w   s.t.  sum(w) = 1,  l <= w <= u
     *
     * Between turning points the free weights are affine in lambda; a turning
     * point is where a free weight reaches a bound or a bounded weight's
     * multiplier changes sign.
     */
    struct Frontier
    {
        /// Efficient turning points in ascending lambda; front() is the
        /// minimum-variance portfolio (lambda = 0), back() the maximum-return one.
        std::vector<TurningPoint> turning_points;
        /// Inefficient branch for lambda < 0, in descending lambda, ending at
        /// the minimum-return portfolio. Used only for targets below the
        /// minimum-variance return.
        std::vector<TurningPoint> lower_branch;

        const TurningPoint &min_variance() const { return turning_points.front(); }
    };

    /// Active-set solution of min w' S w s.t. sum(w) = 1, l <= w <= u.
    /// Throws SingularityError when a KKT system is singular.
    Eigen::VectorXd min_variance_portfolio(const Eigen::MatrixXd &cov, const Eigen::VectorXd &lower,
                                           const Eigen::VectorXd &upper);

    Frontier critical_line(const Eigen::MatrixXd &cov, const Eigen::VectorXd &expected_returns,
                           const ClaConfig &cfg);

    /// Minimum-variance turning point, or the frontier portfolio with return
    /// target_return (linear between adjacent turning points). Throws
    /// InfeasibleError for targets outside the attainable return range.
    Weights cla_weights(const CovarianceMatrix &cov, const Eigen::VectorXd &expected_returns,
                        const ClaConfig &cfg);
}
