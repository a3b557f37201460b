#pragma once

#include "plab/types.hpp"

#include <optional>
#include <span>

namespace plab
{
    /// w' S w. Throws DimensionError on size mismatch.
    double portfolio_variance(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov);

    /// RC_j = w_j (S w)_j / sqrt(w' S w); sums to sqrt(w' S w).
    /// Throws DegenerateError when the portfolio variance is not positive.
    Eigen::VectorXd risk_contribution(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov);

    /// w' sigma / sqrt(w' S w).
    double diversification_ratio(const Eigen::VectorXd &w, const Eigen::MatrixXd &cov);

    /// (HHI - 1/N) / (1 - 1/N). Throws UndefinedError for N = 1.
    double nhhi(const Eigen::VectorXd &w);

    double mean(std::span<const double> xs);
    /// Sample standard deviation (divisor T - 1); 0 for fewer than two points.
    double sample_std(std::span<const double> xs);

    /// (mean - risk_free) / sample std. Throws DegenerateError on zero spread.
    double sharpe_ratio(std::span<const double> returns, double risk_free = 0.0);

    /// Minus the lower empirical quantile at index floor(alpha (T - 1)).
    double var_historical(std::span<const double> returns, double alpha);
    /// Minus the mean of all returns at or below -VaR.
    double cvar_historical(std::span<const double> returns, double alpha);

    /// sum ln(1 + r). Throws DomainError for any r <= -1.
    double compound_log_return(std::span<const double> returns);

    /// (x - baseline) / |baseline|. Throws UndefinedError for a zero baseline.
    double improvement(double mean_x, double mean_baseline);

    /// One table row. Undefined entries are left empty.
    struct MetricRecord
    {
        std::optional<double> daily_return_mean;
        std::optional<double> daily_return_std;
        std::optional<double> improvement;
        std::optional<double> clr;
        std::optional<double> nhhi;
        std::optional<double> pv;
        std::optional<double> dr;
        std::optional<double> sr;
        std::optional<double> var;
        std::optional<double> cvar;
    };
}
