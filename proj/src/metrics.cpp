#include "plab/metrics.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace plab
{
    namespace
    {
        void check_dims(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov)
        {
            if (cov.rows() != cov.cols() || cov.rows() != w.size())
                throw DimensionError("weights of size " + std::to_string(w.size()) + " against a " +
                                     std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()) + " covariance");
        }

        double positive_variance(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov)
        {
            const double pv = portfolio_variance(w, cov);
            if (!(pv > 0.0))
                throw DegenerateError("portfolio variance is zero");
            return pv;
        }

        void check_tail_args(std::span<const double> returns, double alpha)
        {
            if (returns.empty())
                throw InsufficientDataError("VaR needs at least one return");
            if (!(alpha > 0.0 && alpha < 1.0))
                throw DomainError("VaR level must lie in (0, 1)");
        }
    }

    double portfolio_variance(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov)
    {
        check_dims(w, cov);
        return w.dot(cov * w);
    }

    Eigen::VectorXd risk_contribution(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov)
    {
        const double vol = std::sqrt(positive_variance(w, cov));
        return w.cwiseProduct(cov * w) / vol;
    }

    double diversification_ratio(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov)
    {
        const double vol = std::sqrt(positive_variance(w, cov));
        return w.dot(cov.diagonal().cwiseMax(0.0).cwiseSqrt()) / vol;
    }

    double nhhi(const Eigen::VectorXd &w)
    {
        const Index n = w.size();
        if (n < 2)
            throw UndefinedError("NHHI is undefined for a single asset");
        const double inv_n = 1.0 / static_cast<double>(n);
        return (w.squaredNorm() - inv_n) / (1.0 - inv_n);
    }

    double mean(std::span<const double> xs)
    {
        if (xs.empty())
            throw InsufficientDataError("mean of an empty series");
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    }

    double sample_std(std::span<const double> xs)
    {
        if (xs.size() < 2)
            return 0.0;
        const double m = mean(xs);
        double ss = 0.0;
        for (double x : xs)
            ss += (x - m) * (x - m);
        return std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }

    double sharpe_ratio(std::span<const double> returns, double risk_free)
    {
        const double sd = sample_std(returns);
        double scale = 0.0;
        for (double r : returns)
            scale = std::max(scale, std::abs(r));
        // Rounding leaves a residual spread of order eps * |r| on constant series.
        if (!(sd > 1e-13 * scale))
            throw DegenerateError("Sharpe ratio of a series with zero spread");
        return (mean(returns) - risk_free) / sd;
    }

    double var_historical(std::span<const double> returns, double alpha)
    {
        check_tail_args(returns, alpha);
        std::vector<double> sorted(returns.begin(), returns.end());
        std::sort(sorted.begin(), sorted.end());
        const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(sorted.size() - 1)));
        return -sorted[k];
    }

    double cvar_historical(std::span<const double> returns, double alpha)
    {
        const double threshold = -var_historical(returns, alpha);
        double sum = 0.0;
        std::size_t count = 0;
        for (double r : returns)
            if (r <= threshold)
            {
                sum += r;
                ++count;
            }
        return -sum / static_cast<double>(count);
    }

    double compound_log_return(std::span<const double> returns)
    {
        double total = 0.0;
        for (double r : returns)
        {
            if (!(r > -1.0))
                throw DomainError("compound log return needs every return above -1");
            total += std::log1p(r);
        }
        return total;
    }

    double improvement(double mean_x, double mean_baseline)
    {
        if (mean_baseline == 0.0)
            throw UndefinedError("improvement over a zero baseline");
        return (mean_x - mean_baseline) / std::abs(mean_baseline);
    }
}
