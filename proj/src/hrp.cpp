#include "plab/allocation.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace plab
{
    namespace
    {
        struct Cluster
        {
            Index id;
            Index min_leaf;
            Index size;
        };

        void collect_leaves(const Linkage &tree, Index leaves, Index node, std::vector<Index> &out)
        {
            // Iterative to keep deep single-linkage chains off the call stack.
            std::vector<Index> stack{node};
            while (!stack.empty())
            {
                const Index current = stack.back();
                stack.pop_back();
                if (current < leaves)
                {
                    out.push_back(current);
                    continue;
                }
                const Merge &m = tree[static_cast<std::size_t>(current - leaves)];
                stack.push_back(m.right);
                stack.push_back(m.left);
            }
        }

        double cluster_variance(const Eigen::MatrixXd &cov, std::span<const Index> members)
        {
            const Index k = static_cast<Index>(members.size());
            Eigen::VectorXd w(k);
            for (Index a = 0; a < k; ++a)
            {
                const double variance = cov(members[a], members[a]);
                if (!(variance > kVarianceFloor))
                    throw DegenerateError("HRP asset variance at or below the floor",
                                          "#" + std::to_string(members[a]));
                w(a) = 1.0 / variance;
            }
            w /= w.sum();
            double total = 0.0;
            for (Index a = 0; a < k; ++a)
                for (Index b = 0; b < k; ++b)
                    total += w(a) * cov(members[a], members[b]) * w(b);
            return total;
        }

        void bisect(const Eigen::MatrixXd &cov, std::span<const Index> items, Eigen::VectorXd &weights)
        {
            if (items.size() < 2)
                return;
            const std::size_t left_size = (items.size() + 1) / 2;
            const auto left = items.first(left_size);
            const auto right = items.subspan(left_size);
            const double v_left = cluster_variance(cov, left);
            const double v_right = cluster_variance(cov, right);
            const double total = v_left + v_right;
            if (!(total > 0.0))
                throw DegenerateError("HRP cluster variances sum to zero");
            const double alpha = 1.0 - v_left / total;
            for (Index i : left)
                weights(i) *= alpha;
            for (Index i : right)
                weights(i) *= 1.0 - alpha;
            bisect(cov, left, weights);
            bisect(cov, right, weights);
        }
    }

    Eigen::MatrixXd hrp_distance(const CorrelationMatrix &corr)
    {
        return ((1.0 - corr.values.array().max(-1.0).min(1.0)) * 0.5).sqrt().matrix();
    }

    Linkage single_linkage(const Eigen::MatrixXd &distance)
    {
        const Index n = distance.rows();
        if (n < 2 || distance.cols() != n)
            throw DimensionError("single linkage needs a square distance matrix with N >= 2");

        std::vector<Cluster> active;
        for (Index i = 0; i < n; ++i)
            active.push_back({i, i, 1});
        // dist(a, b) between active slots, kept in step with `active`.
        Eigen::MatrixXd dist = distance;

        Linkage tree;
        tree.reserve(static_cast<std::size_t>(n - 1));
        while (active.size() > 1)
        {
            const Index m = static_cast<Index>(active.size());
            Index best_a = -1;
            Index best_b = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Index a = 0; a < m; ++a)
                for (Index b = a + 1; b < m; ++b)
                {
                    const double d = dist(a, b);
                    bool better = d < best;
                    if (!better && d == best)
                    {
                        const auto key = std::minmax(active[a].min_leaf, active[b].min_leaf);
                        const auto best_key = std::minmax(active[best_a].min_leaf, active[best_b].min_leaf);
                        better = key < best_key;
                    }
                    if (better)
                    {
                        best = d;
                        best_a = a;
                        best_b = b;
                    }
                }

            if (active[best_a].min_leaf > active[best_b].min_leaf)
                std::swap(best_a, best_b);
            const Cluster &l = active[best_a];
            const Cluster &r = active[best_b];
            const Cluster merged{n + static_cast<Index>(tree.size()), std::min(l.min_leaf, r.min_leaf), l.size + r.size};
            tree.push_back({l.id, r.id, best, merged.size});

            // Merged cluster takes slot lo; slot hi is removed.
            const Index lo = std::min(best_a, best_b);
            const Index hi = std::max(best_a, best_b);
            for (Index c = 0; c < m; ++c)
            {
                const double d = std::min(dist(lo, c), dist(hi, c));
                dist(lo, c) = d;
                dist(c, lo) = d;
            }
            dist(lo, lo) = 0.0;
            active[static_cast<std::size_t>(lo)] = merged;
            active.erase(active.begin() + hi);

            Eigen::MatrixXd shrunk(m - 1, m - 1);
            for (Index a = 0, sa = 0; a < m; ++a)
            {
                if (a == hi)
                    continue;
                for (Index b = 0, sb = 0; b < m; ++b)
                {
                    if (b == hi)
                        continue;
                    shrunk(sa, sb++) = dist(a, b);
                }
                ++sa;
            }
            dist = std::move(shrunk);
        }
        return tree;
    }

    std::vector<Index> quasi_diagonalize(const Linkage &tree)
    {
        const Index leaves = static_cast<Index>(tree.size()) + 1;
        std::vector<Index> order;
        order.reserve(static_cast<std::size_t>(leaves));
        if (tree.empty())
        {
            order.push_back(0);
            return order;
        }
        collect_leaves(tree, leaves, 2 * leaves - 2, order);
        return order;
    }

    Weights recursive_bisection(const CovarianceMatrix &cov, std::span<const Index> order)
    {
        const Index n = cov.values.rows();
        if (static_cast<Index>(order.size()) != n)
            throw DimensionError("ordering does not cover every asset");
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (Index i : order)
        {
            if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
                throw DimensionError("ordering is not a permutation of the assets");
            seen[static_cast<std::size_t>(i)] = true;
        }

        Weights w;
        w.scheme = SchemeKind::hrp;
        w.values = Eigen::VectorXd::Ones(n);
        if (n == 1)
            return w;
        bisect(cov.values, order, w.values);
        return w;
    }

    Weights hrp_weights(const CovarianceMatrix &cov, const CorrelationMatrix &corr)
    {
        if (cov.values.rows() != corr.values.rows())
            throw DimensionError("covariance and correlation sizes differ");
        const Linkage tree = single_linkage(hrp_distance(corr));
        const std::vector<Index> order = quasi_diagonalize(tree);
        Weights w = recursive_bisection(cov, order);
        w.metric = corr.kind;
        return w;
    }
}
