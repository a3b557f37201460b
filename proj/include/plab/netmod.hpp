#pragma once

#include "plab/types.hpp"

#include <cstdint>
#include <vector>

namespace plab
{
    /// Weighted undirected graph over assets: A_ij = rho_ij when rho_ij > threshold, else 0.
    struct AssetGraph
    {
        Eigen::MatrixXd adjacency;
        double threshold = 0.0;

        Index nodes() const { return adjacency.rows(); }
        /// Sum of link weights, each undirected link counted once.
        double total_weight() const { return adjacency.sum() / 2.0; }
    };

    struct Partition
    {
        /// Community id of each node; ids are contiguous from 0 in order of first appearance.
        std::vector<Index> community_of;
        std::vector<std::vector<Index>> communities;

        /// Builds both views from per-node labels, relabeling them contiguously.
        static Partition from_labels(const std::vector<Index> &labels);
        static Partition singletons(Index n);
    };

    /// Strict threshold: rho_ij == alpha gives no link. Diagonal is zero.
    AssetGraph build_threshold_graph(const CorrelationMatrix &corr, double alpha);

    /// Q = (1/2m) sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j) over ordered pairs.
    /// Throws UndefinedError when the graph has no links.
    double modularity(const AssetGraph &g, const Partition &p);

    /// Greedy two-phase Louvain. Nodes are visited in a seeded shuffled order
    /// each pass; a node moves only on a strictly positive gain. Levels stop
    /// when a pass moves nothing or modularity improves by less than 1e-9.
    Partition louvain_communities(const AssetGraph &g, std::uint64_t seed);

    /// 1 / (#communities * |community|) for every member.
    Eigen::VectorXd community_weights(const Partition &p, Index n);

    Weights netmod_weights(const CorrelationMatrix &corr, double alpha, std::uint64_t seed);
}
