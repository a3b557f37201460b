#pragma once

#include "plab/types.hpp"

#include <span>

namespace plab
{
    /// Sample covariance (denominator T - 1) of the window's columns.
    /// `offset` is the index of the window's first row in the full trace.
    CovarianceMatrix covariance(const ReturnMatrix &window, Index offset = 0);

    /// sigma^-1 Sigma sigma^-1 with an exact unit diagonal. Throws
    /// DegenerateError naming the first asset whose variance is at or below
    /// kVarianceFloor. `labels` is optional and only used for the message.
    CorrelationMatrix pearson_corr(const CovarianceMatrix &cov, std::span<const std::string> labels = {});

    /**
     * Detrended cross-correlation coefficient of two equally long series.
     *
     * Integrated profiles are split into the T - n overlapping boxes of n + 1
     * points; each box is detrended by an OLS line over local time 0..n and
     * the residual covariances (divisor n + 1) are averaged over boxes. The
     * result F2_xy / (F_xx F_yy) is clamped to [-1, 1].
     *
     * Requires n >= 2 and T > n + 1. Throws DegenerateError when either
     * profile is perfectly linear (constant returns).
     */
    double dcca_pair(std::span<const double> x, std::span<const double> y, Index box_length);

    /// All-pairs DCCA through a Gram product of per-series box residuals.
    /// Diagonal is exactly 1; entry (i, j) is mirrored from (j, i).
    CorrelationMatrix dcca_matrix(const ReturnMatrix &window, Index box_length);

    struct DpccaOptions
    {
        /// Added to the DCCA diagonal before inversion; 0 disables.
        double ridge = 0.0;
        /// Largest accepted condition number of the (ridged) DCCA matrix.
        double max_condition = 1e12;
    };

    /// Partial correlations -C_xy / sqrt(C_xx C_yy) of C = inverse(DCCA).
    /// Throws SingularityError when the DCCA matrix is singular or
    /// ill-conditioned.
    CorrelationMatrix dpcca_from_dcca(const CorrelationMatrix &dcca, const DpccaOptions &options = {});
    CorrelationMatrix dpcca_matrix(const ReturnMatrix &window, Index box_length,
                                   const DpccaOptions &options = {});

    /// Dispatches on `kind`; `box_length` is ignored for Pearson.
    CorrelationMatrix correlation(const ReturnMatrix &window, MetricKind kind, Index box_length,
                                  const DpccaOptions &options = {});

    /// Checks symmetry (1e-12), unit diagonal (1e-9) and the [-1, 1] range (1e-9 slack).
    bool correlation_valid(const Eigen::MatrixXd &corr);
}
