#pragma once

#include "plab/types.hpp"

#include <span>
#include <vector>

namespace plab
{
    // ---------------------------------------------------------------- IVP

    /// w_i = (1 / sigma_i) / sum_k (1 / sigma_k). Throws DegenerateError when
    /// any sigma_i is at or below kVarianceFloor.
    Weights ivp_weights(const Eigen::VectorXd &volatilities);

    // ---------------------------------------------------------------- HRP

    /// d_ij = sqrt((1 - rho_ij) / 2).
    Eigen::MatrixXd hrp_distance(const CorrelationMatrix &corr);

    /// One agglomeration step. Leaves are 0..N-1, the k-th merge creates
    /// cluster N + k. `left` is the cluster holding the smaller leaf index.
    struct Merge
    {
        Index left = 0;
        Index right = 0;
        double distance = 0.0;
        Index size = 0;
    };

    using Linkage = std::vector<Merge>;

    /**
     * Single-linkage agglomerative clustering on a distance matrix.
     *
     * Each step merges the two active clusters with the smallest
     * inter-cluster distance (minimum over member pairs). Ties go to the
     * pair whose smallest leaf indices are lexicographically smallest.
     */
    Linkage single_linkage(const Eigen::MatrixXd &distance);

    /// Leaf order from recursively expanding the root, left subtree first.
    std::vector<Index> quasi_diagonalize(const Linkage &tree);

    /// Top-down bisection of `order` into ceil(k/2) | floor(k/2) halves,
    /// splitting weight in inverse proportion to each half's inverse-variance
    /// cluster variance.
    Weights recursive_bisection(const CovarianceMatrix &cov, std::span<const Index> order);

    /// distance -> single linkage -> quasi-diagonalization -> recursive bisection.
    Weights hrp_weights(const CovarianceMatrix &cov, const CorrelationMatrix &corr);
}
