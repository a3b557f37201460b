#include "plab/correlation.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace plab
{
    namespace
    {
        void mirror_upper(Eigen::MatrixXd &m)
        {
            for (Index i = 0; i < m.rows(); ++i)
                for (Index j = 0; j < i; ++j)
                    m(i, j) = m(j, i);
        }

        void require_dcca_window(Index periods, Index box_length)
        {
            if (box_length < 2)
                throw InsufficientDataError("DCCA box length must be >= 2, got " + std::to_string(box_length));
            if (periods <= box_length + 1)
                throw InsufficientDataError("DCCA with box length " + std::to_string(box_length) +
                                            " needs more than " + std::to_string(box_length + 1) +
                                            " observations, got " + std::to_string(periods));
        }

        // Integrated profile X_k = sum_{i<=k} (x_i - mean).
        Eigen::VectorXd profile(const Eigen::Ref<const Eigen::VectorXd> &x)
        {
            const double mean = x.mean();
            Eigen::VectorXd out(x.size());
            double acc = 0.0;
            for (Index k = 0; k < x.size(); ++k)
            {
                acc += x(k) - mean;
                out(k) = acc;
            }
            return out;
        }

        // Residuals of the OLS line through box [start, start + n] written to `out` (n + 1 values).
        void box_residuals(const Eigen::VectorXd &prof, Index start, Index n, double *out)
        {
            const double points = static_cast<double>(n + 1);
            const double t_mean = 0.5 * static_cast<double>(n);
            const double stt = static_cast<double>(n) * (n + 1.0) * (n + 2.0) / 12.0;

            double mean = 0.0;
            for (Index k = 0; k <= n; ++k)
                mean += prof(start + k);
            mean /= points;

            double sxt = 0.0;
            for (Index k = 0; k <= n; ++k)
                sxt += (static_cast<double>(k) - t_mean) * (prof(start + k) - mean);
            const double slope = sxt / stt;

            for (Index k = 0; k <= n; ++k)
                out[k] = prof(start + k) - mean - slope * (static_cast<double>(k) - t_mean);
        }

        // Threshold under which a detrended variance counts as zero.
        double degenerate_threshold(const Eigen::Ref<const Eigen::VectorXd> &x, Index n)
        {
            const double scale = x.cwiseAbs().maxCoeff() * static_cast<double>(n);
            return 1e-24 * scale * scale + 1e-300;
        }

        double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }
    }

    CovarianceMatrix covariance(const ReturnMatrix &window, Index offset)
    {
        const Index periods = window.periods();
        if (periods < 2)
            throw InsufficientDataError("covariance needs at least 2 observations, got " + std::to_string(periods));
        const Eigen::MatrixXd centered = window.values.rowwise() - window.values.colwise().mean();
        CovarianceMatrix cov;
        cov.values = (centered.transpose() * centered) / static_cast<double>(periods - 1);
        mirror_upper(cov.values);
        cov.window_start = offset;
        cov.window_end = offset + periods;
        return cov;
    }

    CorrelationMatrix pearson_corr(const CovarianceMatrix &cov, std::span<const std::string> labels)
    {
        const Index n = cov.values.rows();
        Eigen::VectorXd inv_sigma(n);
        for (Index i = 0; i < n; ++i)
        {
            const double variance = cov.values(i, i);
            if (!(variance > kVarianceFloor))
                throw DegenerateError("asset variance at or below the floor",
                                      static_cast<std::size_t>(i) < labels.size()
                                          ? labels[static_cast<std::size_t>(i)]
                                          : "#" + std::to_string(i));
            inv_sigma(i) = 1.0 / std::sqrt(variance);
        }

        CorrelationMatrix corr;
        corr.kind = MetricKind::pearson;
        corr.values = inv_sigma.asDiagonal() * cov.values * inv_sigma.asDiagonal();
        for (Index i = 0; i < n; ++i)
        {
            corr.values(i, i) = 1.0;
            for (Index j = i + 1; j < n; ++j)
                corr.values(i, j) = clamp_unit(corr.values(i, j));
        }
        mirror_upper(corr.values);
        return corr;
    }

    double dcca_pair(std::span<const double> x, std::span<const double> y, Index box_length)
    {
        if (x.size() != y.size())
            throw DimensionError("DCCA series lengths differ");
        const Index periods = static_cast<Index>(x.size());
        require_dcca_window(periods, box_length);

        const Eigen::Map<const Eigen::VectorXd> xs(x.data(), periods);
        const Eigen::Map<const Eigen::VectorXd> ys(y.data(), periods);
        const Eigen::VectorXd px = profile(xs);
        const Eigen::VectorXd py = profile(ys);

        const Index n = box_length;
        const Index boxes = periods - n;
        std::vector<double> rx(static_cast<std::size_t>(n + 1));
        std::vector<double> ry(static_cast<std::size_t>(n + 1));
        double fxy = 0.0;
        double fxx = 0.0;
        double fyy = 0.0;
        for (Index j = 0; j < boxes; ++j)
        {
            box_residuals(px, j, n, rx.data());
            box_residuals(py, j, n, ry.data());
            double cxy = 0.0;
            double cxx = 0.0;
            double cyy = 0.0;
            for (std::size_t k = 0; k < rx.size(); ++k)
            {
                cxy += rx[k] * ry[k];
                cxx += rx[k] * rx[k];
                cyy += ry[k] * ry[k];
            }
            const double points = static_cast<double>(n + 1);
            fxy += cxy / points;
            fxx += cxx / points;
            fyy += cyy / points;
        }
        fxy /= static_cast<double>(boxes);
        fxx /= static_cast<double>(boxes);
        fyy /= static_cast<double>(boxes);

        if (fxx <= degenerate_threshold(xs, n) / static_cast<double>(n + 1))
            throw DegenerateError("detrended variance of the first series is zero");
        if (fyy <= degenerate_threshold(ys, n) / static_cast<double>(n + 1))
            throw DegenerateError("detrended variance of the second series is zero");
        return clamp_unit(fxy / std::sqrt(fxx * fyy));
    }

    CorrelationMatrix dcca_matrix(const ReturnMatrix &window, Index box_length)
    {
        const Index periods = window.periods();
        const Index assets = window.assets();
        require_dcca_window(periods, box_length);

        const Index n = box_length;
        const Index boxes = periods - n;
        // Column a holds every box residual of asset a, so F2 for all pairs is one Gram product.
        Eigen::MatrixXd residuals(boxes * (n + 1), assets);
        for (Index a = 0; a < assets; ++a)
        {
            const Eigen::VectorXd prof = profile(window.values.col(a));
            double *column = residuals.col(a).data();
            for (Index j = 0; j < boxes; ++j)
                box_residuals(prof, j, n, column + j * (n + 1));
        }

        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(assets, assets);
        gram.selfadjointView<Eigen::Upper>().rankUpdate(residuals.transpose());
        const double normalizer = static_cast<double>(boxes) * static_cast<double>(n + 1);

        Eigen::VectorXd inv_f(assets);
        for (Index a = 0; a < assets; ++a)
        {
            const double fxx = gram(a, a) / normalizer;
            if (fxx <= degenerate_threshold(window.values.col(a), n) / static_cast<double>(n + 1))
                throw DegenerateError("detrended variance is zero",
                                      static_cast<std::size_t>(a) < window.labels.size()
                                          ? window.labels[static_cast<std::size_t>(a)]
                                          : "#" + std::to_string(a));
            inv_f(a) = 1.0 / std::sqrt(fxx);
        }

        CorrelationMatrix corr;
        corr.kind = MetricKind::dcca;
        corr.box_length = box_length;
        corr.values.resize(assets, assets);
        for (Index i = 0; i < assets; ++i)
        {
            corr.values(i, i) = 1.0;
            for (Index j = i + 1; j < assets; ++j)
                corr.values(i, j) = clamp_unit(gram(i, j) / normalizer * inv_f(i) * inv_f(j));
        }
        mirror_upper(corr.values);
        return corr;
    }

    CorrelationMatrix dpcca_from_dcca(const CorrelationMatrix &dcca, const DpccaOptions &options)
    {
        const Index n = dcca.values.rows();
        Eigen::MatrixXd rho = dcca.values;
        if (options.ridge > 0.0)
            rho.diagonal().array() += options.ridge;

        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
        if (eig.info() != Eigen::Success)
            throw SingularityError("eigen-decomposition of the DCCA matrix failed");
        const Eigen::VectorXd &lambda = eig.eigenvalues();
        const double largest = lambda.cwiseAbs().maxCoeff();
        const double smallest = lambda.minCoeff();
        if (!(smallest > 0.0) || largest / smallest > options.max_condition)
            throw SingularityError("DCCA matrix is singular or ill-conditioned (smallest eigenvalue " +
                                   std::to_string(smallest) + ", largest " + std::to_string(largest) + ")");

        const Eigen::MatrixXd inverse =
            eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

        CorrelationMatrix corr;
        corr.kind = MetricKind::dpcca;
        corr.box_length = dcca.box_length;
        corr.values.resize(n, n);
        for (Index i = 0; i < n; ++i)
        {
            corr.values(i, i) = 1.0;
            for (Index j = i + 1; j < n; ++j)
                corr.values(i, j) = clamp_unit(-inverse(i, j) / std::sqrt(inverse(i, i) * inverse(j, j)));
        }
        mirror_upper(corr.values);
        return corr;
    }

    CorrelationMatrix dpcca_matrix(const ReturnMatrix &window, Index box_length, const DpccaOptions &options)
    {
        return dpcca_from_dcca(dcca_matrix(window, box_length), options);
    }

    CorrelationMatrix correlation(const ReturnMatrix &window, MetricKind kind, Index box_length,
                                  const DpccaOptions &options)
    {
        switch (kind)
        {
        case MetricKind::pearson:
            return pearson_corr(covariance(window), window.labels);
        case MetricKind::dcca:
            return dcca_matrix(window, box_length);
        case MetricKind::dpcca:
            return dpcca_matrix(window, box_length, options);
        }
        throw UsageError("unknown correlation metric");
    }

    bool correlation_valid(const Eigen::MatrixXd &corr)
    {
        if (corr.rows() != corr.cols())
            return false;
        for (Index i = 0; i < corr.rows(); ++i)
        {
            if (std::abs(corr(i, i) - 1.0) > 1e-9)
                return false;
            for (Index j = 0; j < corr.cols(); ++j)
            {
                if (std::abs(corr(i, j) - corr(j, i)) > 1e-12)
                    return false;
                if (std::abs(corr(i, j)) > 1.0 + 1e-9)
                    return false;
            }
        }
        return true;
    }
}
