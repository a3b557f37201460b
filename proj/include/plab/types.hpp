#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plab
{
    using Index = Eigen::Index;

    /// Variances at or below this value (return^2 units) mark an asset as constant.
    inline constexpr double kVarianceFloor = 1e-12;

    enum class MetricKind
    {
        pearson,
        dcca,
        dpcca
    };

    enum class SchemeKind
    {
        ivp,
        hrp,
        cla,
        netmod
    };

    std::string_view to_string(MetricKind kind);
    std::string_view to_string(SchemeKind kind);

    /// Short label used in method identifiers: pearson is reported as "cov".
    std::string_view metric_label(MetricKind kind);

    /// Accepts "pearson", "cov", "dcca", "dpcca". Throws UsageError otherwise.
    MetricKind parse_metric(std::string_view text);
    /// Accepts "ivp", "hrp", "cla", "netmod" (case-insensitive). Throws UsageError otherwise.
    SchemeKind parse_scheme(std::string_view text);

    /**
     * T x N matrix of per-period simple returns.
     *
     * Rows are periods, columns are assets. Generators may produce values
     * at or below -1 for extreme parameterizations; `validate_returns`
     * enforces the full invariant before a matrix enters the evaluation
     * pipeline.
     */
    struct ReturnMatrix
    {
        Eigen::MatrixXd values;
        std::vector<std::string> labels;

        Index periods() const { return values.rows(); }
        Index assets() const { return values.cols(); }

        /// Rows [begin, end) as a new matrix sharing the labels.
        ReturnMatrix slice(Index begin, Index end) const;
    };

    /// Labels "A0", "A1", ... for n assets.
    std::vector<std::string> default_labels(Index n);

    /// Throws DomainError / InsufficientDataError / DimensionError when the
    /// matrix breaks: T >= 2, N >= 2, one label per column, finite values > -1.
    void validate_returns(const ReturnMatrix &returns);

    struct CovarianceMatrix
    {
        Eigen::MatrixXd values;
        Index window_start = 0;
        Index window_end = 0;

        Eigen::VectorXd volatilities() const { return values.diagonal().cwiseMax(0.0).cwiseSqrt(); }
    };

    struct CorrelationMatrix
    {
        Eigen::MatrixXd values;
        MetricKind kind = MetricKind::pearson;
        std::optional<Index> box_length;
    };

    struct Weights
    {
        Eigen::VectorXd values;
        SchemeKind scheme = SchemeKind::ivp;
        MetricKind metric = MetricKind::pearson;
    };

    /// Checks sum = 1 and long-only bounds within `tolerance`.
    bool weights_valid(const Eigen::VectorXd &w, double tolerance = 1e-9);
}
