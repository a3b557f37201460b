#include "plab/cla.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace plab
{
    namespace
    {
        enum class Status
        {
            free,
            lower,
            upper
        };

        // Problem data after rescaling: cov by its largest diagonal entry and
        // mu to zero mean and unit max-abs spread. Neither changes the path;
        // lambda is mapped back through `lambda_scale`.
        struct Problem
        {
            Eigen::MatrixXd cov;
            Eigen::VectorXd mu;
            Eigen::VectorXd lower;
            Eigen::VectorXd upper;
            double lambda_scale = 1.0;
        };

        constexpr double kStepTol = 1e-13;
        constexpr double kMultiplierTol = 1e-12;
        constexpr double kSlopeTol = 1e-12;

        Problem normalize(const Eigen::MatrixXd &cov, const Eigen::VectorXd &mu, const Eigen::VectorXd &lower,
                          const Eigen::VectorXd &upper)
        {
            Problem p;
            const double cov_scale = cov.diagonal().cwiseAbs().maxCoeff();
            if (!(cov_scale > 0.0))
                throw SingularityError("covariance matrix is zero");
            p.cov = cov / cov_scale;
            p.lower = lower;
            p.upper = upper;
            const Index n = cov.rows();
            if (mu.size() == n && n > 0)
            {
                const Eigen::VectorXd centered = mu.array() - mu.mean();
                const double mu_scale = centered.cwiseAbs().maxCoeff();
                if (mu_scale > 0.0)
                {
                    p.mu = centered / mu_scale;
                    p.lambda_scale = cov_scale / mu_scale;
                }
                else
                    p.mu = Eigen::VectorXd::Zero(n);
            }
            else
                p.mu = Eigen::VectorXd::Zero(n);
            return p;
        }

        std::vector<Index> free_set(const std::vector<Status> &status)
        {
            std::vector<Index> f;
            for (std::size_t i = 0; i < status.size(); ++i)
                if (status[i] == Status::free)
                    f.push_back(static_cast<Index>(i));
            return f;
        }

        // LU of the bordered KKT matrix [S_FF, -1; 1', 0].
        Eigen::FullPivLU<Eigen::MatrixXd> factor_kkt(const Eigen::MatrixXd &cov, const std::vector<Index> &f)
        {
            const Index k = static_cast<Index>(f.size());
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k + 1, k + 1);
            for (Index a = 0; a < k; ++a)
            {
                for (Index b = 0; b < k; ++b)
                    m(a, b) = cov(f[a], f[b]);
                m(a, k) = -1.0;
                m(k, a) = 1.0;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
            lu.setThreshold(1e-12);
            if (!lu.isInvertible())
                throw SingularityError("KKT system is singular for a free set of " + std::to_string(k) + " assets");
            return lu;
        }

        // Right-hand side of the KKT system with bounded weights moved across.
        Eigen::VectorXd kkt_rhs(const Problem &p, const Eigen::VectorXd &w, const std::vector<Status> &status,
                                const std::vector<Index> &f)
        {
            const Index k = static_cast<Index>(f.size());
            Eigen::VectorXd rhs(k + 1);
            double bounded_sum = 0.0;
            for (std::size_t j = 0; j < status.size(); ++j)
                if (status[j] != Status::free)
                    bounded_sum += w(static_cast<Index>(j));
            for (Index a = 0; a < k; ++a)
            {
                double acc = 0.0;
                for (std::size_t j = 0; j < status.size(); ++j)
                    if (status[j] != Status::free)
                        acc += p.cov(f[a], static_cast<Index>(j)) * w(static_cast<Index>(j));
                rhs(a) = -acc;
            }
            rhs(k) = 1.0 - bounded_sum;
            return rhs;
        }

        struct ActiveState
        {
            Eigen::VectorXd w;
            std::vector<Status> status;
        };

        // Feasible vertex: lowest-variance assets raised to their upper bound first.
        ActiveState initial_vertex(const Problem &p)
        {
            const Index n = p.cov.rows();
            ActiveState s{p.lower, std::vector<Status>(static_cast<std::size_t>(n), Status::lower)};
            std::vector<Index> order(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i)
                order[static_cast<std::size_t>(i)] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](Index a, Index b) { return p.cov(a, a) < p.cov(b, b); });

            double remaining = 1.0 - p.lower.sum();
            for (Index i : order)
            {
                const double room = p.upper(i) - p.lower(i);
                if (remaining <= room)
                {
                    s.w(i) += remaining;
                    s.status[static_cast<std::size_t>(i)] = Status::free;
                    return s;
                }
                s.w(i) = p.upper(i);
                s.status[static_cast<std::size_t>(i)] = Status::upper;
                remaining -= room;
            }
            throw InfeasibleError("upper bounds sum to less than 1");
        }

        ActiveState solve_min_variance(const Problem &p)
        {
            const Index n = p.cov.rows();
            ActiveState s = initial_vertex(p);
            const Index max_iter = 100 * (n + 1);
            for (Index iter = 0; iter < max_iter; ++iter)
            {
                const std::vector<Index> f = free_set(s.status);
                const auto lu = factor_kkt(p.cov, f);
                const Eigen::VectorXd x = lu.solve(kkt_rhs(p, s.w, s.status, f));
                const Index k = static_cast<Index>(f.size());

                Eigen::VectorXd step(k);
                for (Index a = 0; a < k; ++a)
                    step(a) = x(a) - s.w(f[a]);

                if (step.cwiseAbs().maxCoeff() <= kStepTol)
                {
                    const double gamma = x(k);
                    const Eigen::VectorXd g = p.cov * s.w - Eigen::VectorXd::Constant(n, gamma);
                    Index release = -1;
                    double worst = kMultiplierTol;
                    for (Index i = 0; i < n; ++i)
                    {
                        const Status st = s.status[static_cast<std::size_t>(i)];
                        if (st == Status::free || p.upper(i) - p.lower(i) <= 1e-15)
                            continue;
                        const double violation = st == Status::lower ? -g(i) : g(i);
                        if (violation > worst)
                        {
                            worst = violation;
                            release = i;
                        }
                    }
                    if (release < 0)
                        return s;
                    s.status[static_cast<std::size_t>(release)] = Status::free;
                    continue;
                }

                double alpha = 1.0;
                Index blocking = -1;
                Status block_to = Status::lower;
                for (Index a = 0; a < k; ++a)
                {
                    const Index i = f[a];
                    double limit = std::numeric_limits<double>::infinity();
                    Status to = Status::lower;
                    if (step(a) < -kStepTol)
                        limit = (p.lower(i) - s.w(i)) / step(a);
                    else if (step(a) > kStepTol)
                    {
                        limit = (p.upper(i) - s.w(i)) / step(a);
                        to = Status::upper;
                    }
                    if (limit < alpha)
                    {
                        alpha = std::max(0.0, limit);
                        blocking = i;
                        block_to = to;
                    }
                }
                for (Index a = 0; a < k; ++a)
                    s.w(f[a]) += alpha * step(a);
                if (blocking >= 0)
                {
                    s.w(blocking) = block_to == Status::lower ? p.lower(blocking) : p.upper(blocking);
                    s.status[static_cast<std::size_t>(blocking)] = block_to;
                }
            }
            throw SingularityError("minimum-variance active set did not converge");
        }

        // Follows the critical line from the lambda = 0 solution in direction
        // `dir` (+1 towards higher return, -1 towards lower) and returns the
        // turning points met on the way.
        std::vector<TurningPoint> trace_path(const Problem &p, ActiveState s, double dir,
                                             const Eigen::VectorXd &mu_original, const Eigen::MatrixXd &cov_original)
        {
            const Index n = p.cov.rows();
            std::vector<TurningPoint> points;
            double lambda = 0.0;
            Index last_changed = -1;
            const Index max_iter = 20 * (n + 1);

            for (Index iter = 0; iter < max_iter; ++iter)
            {
                const std::vector<Index> f = free_set(s.status);
                const Index k = static_cast<Index>(f.size());
                const auto lu = factor_kkt(p.cov, f);
                const Eigen::VectorXd base = lu.solve(kkt_rhs(p, s.w, s.status, f));
                Eigen::VectorXd mu_rhs = Eigen::VectorXd::Zero(k + 1);
                for (Index a = 0; a < k; ++a)
                    mu_rhs(a) = p.mu(f[a]);
                const Eigen::VectorXd slope = lu.solve(mu_rhs);

                Index event = -1;
                double event_lambda = 0.0;
                double nearest = std::numeric_limits<double>::infinity();
                auto consider = [&](Index i, double candidate) {
                    const double ahead = (candidate - lambda) * dir;
                    if (ahead < -1e-9 || i == last_changed)
                        return;
                    if (std::max(ahead, 0.0) < nearest)
                    {
                        nearest = std::max(ahead, 0.0);
                        event = i;
                        event_lambda = dir > 0 ? std::max(candidate, lambda) : std::min(candidate, lambda);
                    }
                };

                for (Index a = 0; a < k; ++a)
                {
                    const double b = slope(a);
                    if (std::abs(b) <= kSlopeTol)
                        continue;
                    const Index i = f[a];
                    const double target = b * dir > 0 ? p.upper(i) : p.lower(i);
                    consider(i, (target - base(a)) / b);
                }

                // Multipliers of bounded weights: g_i(lambda) = offset_i + lambda * rate_i.
                Eigen::VectorXd w_base = s.w;
                Eigen::VectorXd w_slope = Eigen::VectorXd::Zero(n);
                for (Index a = 0; a < k; ++a)
                {
                    w_base(f[a]) = base(a);
                    w_slope(f[a]) = slope(a);
                }
                const Eigen::VectorXd offset = p.cov * w_base - Eigen::VectorXd::Constant(n, base(k));
                const Eigen::VectorXd rate = p.cov * w_slope - p.mu - Eigen::VectorXd::Constant(n, slope(k));
                for (Index i = 0; i < n; ++i)
                {
                    const Status st = s.status[static_cast<std::size_t>(i)];
                    if (st == Status::free || p.upper(i) - p.lower(i) <= 1e-15)
                        continue;
                    const double q = rate(i);
                    const bool crossing = st == Status::lower ? q * dir < -kSlopeTol : q * dir > kSlopeTol;
                    if (crossing)
                        consider(i, -offset(i) / q);
                }

                if (event < 0)
                    break;

                s.w = w_base + event_lambda * w_slope;
                Status &st = s.status[static_cast<std::size_t>(event)];
                if (st == Status::free)
                {
                    const double b = w_slope(event);
                    st = b * dir > 0 ? Status::upper : Status::lower;
                    s.w(event) = st == Status::upper ? p.upper(event) : p.lower(event);
                }
                else
                    st = Status::free;
                last_changed = event;
                lambda = event_lambda;

                TurningPoint tp;
                tp.lambda = lambda * p.lambda_scale;
                tp.weights = s.w.cwiseMax(p.lower).cwiseMin(p.upper);
                tp.expected_return = mu_original.dot(tp.weights);
                tp.variance = tp.weights.dot(cov_original * tp.weights);
                if (!points.empty() && std::abs(points.back().lambda - tp.lambda) <= 1e-15 * std::max(1.0, std::abs(tp.lambda)))
                    points.back() = std::move(tp);
                else
                    points.push_back(std::move(tp));
            }
            return points;
        }

        void check_inputs(const Eigen::MatrixXd &cov, const Eigen::VectorXd &mu, const ClaConfig &cfg)
        {
            const Index n = cov.rows();
            if (n == 0 || cov.cols() != n)
                throw DimensionError("CLA needs a non-empty square covariance matrix");
            if (mu.size() != n)
                throw DimensionError("expected-return vector size differs from the covariance size");
            validate(cfg, n);
        }
    }

    ClaConfig ClaConfig::uniform(Index n, double lower, double upper, std::optional<double> target)
    {
        return ClaConfig{Eigen::VectorXd::Constant(n, lower), Eigen::VectorXd::Constant(n, upper), target};
    }

    void validate(const ClaConfig &cfg, Index assets)
    {
        if (cfg.lower_bounds.size() != assets || cfg.upper_bounds.size() != assets)
            throw ConfigError("cla.bounds", "bound vectors must have one entry per asset");
        for (Index i = 0; i < assets; ++i)
        {
            const double l = cfg.lower_bounds(i);
            const double u = cfg.upper_bounds(i);
            if (!(l >= 0.0 && l <= u && u <= 1.0))
                throw ConfigError("cla.bounds", "need 0 <= lower <= upper <= 1 for asset " + std::to_string(i));
        }
        if (cfg.lower_bounds.sum() > 1.0 + 1e-12)
            throw ConfigError("cla.lower_bound", "lower bounds sum above 1");
        if (cfg.upper_bounds.sum() < 1.0 - 1e-12)
            throw ConfigError("cla.upper_bound", "upper bounds sum below 1");
    }

    Eigen::VectorXd min_variance_portfolio(const Eigen::MatrixXd &cov, const Eigen::VectorXd &lower,
                                           const Eigen::VectorXd &upper)
    {
        const Index n = cov.rows();
        check_inputs(cov, Eigen::VectorXd::Zero(n), ClaConfig{lower, upper, std::nullopt});
        const Problem p = normalize(cov, Eigen::VectorXd::Zero(n), lower, upper);
        return solve_min_variance(p).w.cwiseMax(lower).cwiseMin(upper);
    }

    Frontier critical_line(const Eigen::MatrixXd &cov, const Eigen::VectorXd &expected_returns,
                           const ClaConfig &cfg)
    {
        check_inputs(cov, expected_returns, cfg);
        const Problem p = normalize(cov, expected_returns, cfg.lower_bounds, cfg.upper_bounds);
        const ActiveState start = solve_min_variance(p);

        Frontier frontier;
        TurningPoint origin;
        origin.lambda = 0.0;
        origin.weights = start.w.cwiseMax(p.lower).cwiseMin(p.upper);
        origin.expected_return = expected_returns.dot(origin.weights);
        origin.variance = origin.weights.dot(cov * origin.weights);
        frontier.turning_points.push_back(origin);

        for (TurningPoint &tp : trace_path(p, start, +1.0, expected_returns, cov))
            frontier.turning_points.push_back(std::move(tp));
        frontier.lower_branch = trace_path(p, start, -1.0, expected_returns, cov);
        return frontier;
    }

    Weights cla_weights(const CovarianceMatrix &cov, const Eigen::VectorXd &expected_returns, const ClaConfig &cfg)
    {
        Weights w;
        w.scheme = SchemeKind::cla;
        if (!cfg.target_return)
        {
            // The minimum-variance turning point is the lambda = 0 end of the critical line.
            check_inputs(cov.values, expected_returns, cfg);
            w.values = min_variance_portfolio(cov.values, cfg.lower_bounds, cfg.upper_bounds);
            return w;
        }

        const Frontier frontier = critical_line(cov.values, expected_returns, cfg);
        std::vector<const TurningPoint *> path;
        for (auto it = frontier.lower_branch.rbegin(); it != frontier.lower_branch.rend(); ++it)
            path.push_back(&*it);
        for (const TurningPoint &tp : frontier.turning_points)
            path.push_back(&tp);

        const double target = *cfg.target_return;
        const double lowest = path.front()->expected_return;
        const double highest = path.back()->expected_return;
        const double tol = 1e-12 * std::max({1.0, std::abs(lowest), std::abs(highest)});
        if (target < lowest - tol || target > highest + tol)
            throw InfeasibleError("target return " + std::to_string(target) + " outside attainable range [" +
                                  std::to_string(lowest) + ", " + std::to_string(highest) + "]");

        if (target <= lowest)
        {
            w.values = path.front()->weights;
            return w;
        }
        for (std::size_t k = 0; k + 1 < path.size(); ++k)
        {
            const double r0 = path[k]->expected_return;
            const double r1 = path[k + 1]->expected_return;
            if (target >= r0 - tol && target <= r1 + tol)
            {
                const double theta = r1 - r0 > tol ? std::clamp((target - r0) / (r1 - r0), 0.0, 1.0) : 0.0;
                w.values = (1.0 - theta) * path[k]->weights + theta * path[k + 1]->weights;
                return w;
            }
        }
        w.values = path.back()->weights;
        return w;
    }
}
