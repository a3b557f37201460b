#include "plab/netmod.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace plab
{
    namespace
    {
        constexpr double kMoveTol = 1e-12;
        constexpr double kLevelTol = 1e-9;

        // Modularity of `labels` on a (possibly aggregated) weight matrix
        // whose diagonal holds intra-node weight over ordered pairs.
        double modularity_of(const Eigen::MatrixXd &w, const std::vector<Index> &labels, double two_m)
        {
            const Index n = w.rows();
            const Index k = *std::max_element(labels.begin(), labels.end()) + 1;
            Eigen::VectorXd inside = Eigen::VectorXd::Zero(k);
            Eigen::VectorXd total = Eigen::VectorXd::Zero(k);
            for (Index i = 0; i < n; ++i)
            {
                const Index ci = labels[static_cast<std::size_t>(i)];
                total(ci) += w.row(i).sum();
                for (Index j = 0; j < n; ++j)
                    if (labels[static_cast<std::size_t>(j)] == ci)
                        inside(ci) += w(i, j);
            }
            double q = 0.0;
            for (Index c = 0; c < k; ++c)
                q += inside(c) / two_m - (total(c) / two_m) * (total(c) / two_m);
            return q;
        }

        std::vector<Index> relabel(const std::vector<Index> &labels)
        {
            std::map<Index, Index> map;
            std::vector<Index> out(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i)
            {
                const auto [it, fresh] = map.try_emplace(labels[i], static_cast<Index>(map.size()));
                out[i] = it->second;
            }
            return out;
        }

        // Local moving phase. Returns true when any node changed community.
        bool local_moves(const Eigen::MatrixXd &w, double two_m, std::vector<Index> &comm, std::mt19937_64 &rng)
        {
            const Index n = w.rows();
            const Eigen::VectorXd degree = w.rowwise().sum();
            Eigen::VectorXd tot = degree;
            std::iota(comm.begin(), comm.end(), Index{0});

            std::vector<Index> order(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), Index{0});
            Eigen::VectorXd link_to(n);

            bool any_move = false;
            double q = modularity_of(w, comm, two_m);
            for (;;)
            {
                std::shuffle(order.begin(), order.end(), rng);
                bool moved = false;
                for (Index i : order)
                {
                    const Index home = comm[static_cast<std::size_t>(i)];
                    const double ki = degree(i);
                    tot(home) -= ki;

                    link_to.setZero();
                    for (Index j = 0; j < n; ++j)
                        if (j != i && w(i, j) != 0.0)
                            link_to(comm[static_cast<std::size_t>(j)]) += w(i, j);

                    Index best = home;
                    double best_gain = link_to(home) - tot(home) * ki / two_m;
                    for (Index j = 0; j < n; ++j)
                    {
                        if (j == i || w(i, j) == 0.0)
                            continue;
                        const Index c = comm[static_cast<std::size_t>(j)];
                        const double gain = link_to(c) - tot(c) * ki / two_m;
                        if (gain > best_gain + kMoveTol)
                        {
                            best_gain = gain;
                            best = c;
                        }
                    }
                    tot(best) += ki;
                    if (best != home)
                    {
                        comm[static_cast<std::size_t>(i)] = best;
                        moved = true;
                    }
                }
                if (!moved)
                    break;
                any_move = true;
                const double next_q = modularity_of(w, comm, two_m);
                const double gain = next_q - q;
                q = next_q;
                if (gain < kLevelTol)
                    break;
            }
            return any_move;
        }
    }

    Partition Partition::from_labels(const std::vector<Index> &labels)
    {
        Partition p;
        p.community_of = relabel(labels);
        const Index k = p.community_of.empty()
                            ? 0
                            : *std::max_element(p.community_of.begin(), p.community_of.end()) + 1;
        p.communities.assign(static_cast<std::size_t>(k), {});
        for (std::size_t i = 0; i < p.community_of.size(); ++i)
            p.communities[static_cast<std::size_t>(p.community_of[i])].push_back(static_cast<Index>(i));
        return p;
    }

    Partition Partition::singletons(Index n)
    {
        std::vector<Index> labels(static_cast<std::size_t>(n));
        std::iota(labels.begin(), labels.end(), Index{0});
        return from_labels(labels);
    }

    AssetGraph build_threshold_graph(const CorrelationMatrix &corr, double alpha)
    {
        const Index n = corr.values.rows();
        if (corr.values.cols() != n)
            throw DimensionError("correlation matrix is not square");
        AssetGraph g;
        g.threshold = alpha;
        g.adjacency = Eigen::MatrixXd::Zero(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (i != j && corr.values(i, j) > alpha)
                    g.adjacency(i, j) = corr.values(i, j);
        return g;
    }

    double modularity(const AssetGraph &g, const Partition &p)
    {
        const double two_m = g.adjacency.sum();
        if (!(two_m > 0.0))
            throw UndefinedError("modularity is undefined on a graph without links");
        if (static_cast<Index>(p.community_of.size()) != g.nodes())
            throw DimensionError("partition size differs from the node count");
        return modularity_of(g.adjacency, p.community_of, two_m);
    }

    Partition louvain_communities(const AssetGraph &g, std::uint64_t seed)
    {
        const Index n = g.nodes();
        const double two_m = g.adjacency.sum();
        if (n == 0 || !(two_m > 0.0))
            return Partition::singletons(n);

        std::mt19937_64 rng(seed);
        // membership[v] = node of the current aggregated graph holding original node v.
        std::vector<Index> membership(static_cast<std::size_t>(n));
        std::iota(membership.begin(), membership.end(), Index{0});
        Eigen::MatrixXd w = g.adjacency;
        double q = modularity_of(w, membership, two_m);

        for (;;)
        {
            std::vector<Index> comm(static_cast<std::size_t>(w.rows()));
            if (!local_moves(w, two_m, comm, rng))
                break;
            comm = relabel(comm);
            const Index k = *std::max_element(comm.begin(), comm.end()) + 1;

            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, k);
            for (Index i = 0; i < w.rows(); ++i)
                for (Index j = 0; j < w.cols(); ++j)
                    next(comm[static_cast<std::size_t>(i)], comm[static_cast<std::size_t>(j)]) += w(i, j);
            for (Index &v : membership)
                v = comm[static_cast<std::size_t>(v)];
            w = std::move(next);

            const double next_q = modularity_of(g.adjacency, membership, two_m);
            const double gain = next_q - q;
            q = next_q;
            if (gain < kLevelTol || k == 1)
                break;
        }
        return Partition::from_labels(membership);
    }

    Eigen::VectorXd community_weights(const Partition &p, Index n)
    {
        if (static_cast<Index>(p.community_of.size()) != n || p.communities.empty())
            throw DimensionError("partition does not cover the assets");
        const double per_community = 1.0 / static_cast<double>(p.communities.size());
        Eigen::VectorXd w(n);
        for (const auto &members : p.communities)
            for (Index i : members)
                w(i) = per_community / static_cast<double>(members.size());
        return w;
    }

    Weights netmod_weights(const CorrelationMatrix &corr, double alpha, std::uint64_t seed)
    {
        const AssetGraph g = build_threshold_graph(corr, alpha);
        Weights w;
        w.scheme = SchemeKind::netmod;
        w.metric = corr.kind;
        w.values = community_weights(louvain_communities(g, seed), g.nodes());
        return w;
    }
}
