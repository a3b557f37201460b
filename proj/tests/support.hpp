#pragma once

#include "plab/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace plab::test
{
    inline Eigen::MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64 &rng, double scale = 1.0)
    {
        std::normal_distribution<double> z(0.0, scale);
        Eigen::MatrixXd m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r)
                m(r, c) = z(rng);
        return m;
    }

    /// A' A / k with A k x n: positive semidefinite, full rank when k >= n.
    inline Eigen::MatrixXd random_psd(Index n, Index k, std::mt19937_64 &rng)
    {
        const Eigen::MatrixXd a = random_matrix(k, n, rng);
        return a.transpose() * a / static_cast<double>(k);
    }

    inline ReturnMatrix random_returns(Index periods, Index assets, std::mt19937_64 &rng, double scale = 0.01)
    {
        return ReturnMatrix{random_matrix(periods, assets, rng, scale), default_labels(assets)};
    }

    /// Uniform point on the long-only simplex.
    inline Eigen::VectorXd random_simplex(Index n, std::mt19937_64 &rng)
    {
        std::exponential_distribution<double> e(1.0);
        Eigen::VectorXd w(n);
        for (Index i = 0; i < n; ++i)
            w(i) = e(rng);
        return w / w.sum();
    }

    inline double pearson(const std::vector<double> &x, const std::vector<double> &y)
    {
        const double n = static_cast<double>(x.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            mx += x[i];
            my += y[i];
        }
        mx /= n;
        my /= n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        return sxy / std::sqrt(sxx * syy);
    }

    inline std::vector<double> column(const Eigen::MatrixXd &m, Index c)
    {
        return std::vector<double>(m.col(c).data(), m.col(c).data() + m.rows());
    }
}
