#include "plab/types.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace plab
{
    namespace
    {
        std::string lower(std::string_view text)
        {
            std::string out(text);
            std::transform(out.begin(), out.end(), out.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            return out;
        }
    }

    std::string_view to_string(MetricKind kind)
    {
        switch (kind)
        {
        case MetricKind::pearson:
            return "pearson";
        case MetricKind::dcca:
            return "dcca";
        case MetricKind::dpcca:
            return "dpcca";
        }
        return "?";
    }

    std::string_view to_string(SchemeKind kind)
    {
        switch (kind)
        {
        case SchemeKind::ivp:
            return "ivp";
        case SchemeKind::hrp:
            return "hrp";
        case SchemeKind::cla:
            return "cla";
        case SchemeKind::netmod:
            return "netmod";
        }
        return "?";
    }

    std::string_view metric_label(MetricKind kind)
    {
        return kind == MetricKind::pearson ? "cov" : to_string(kind);
    }

    MetricKind parse_metric(std::string_view text)
    {
        const std::string t = lower(text);
        if (t == "pearson" || t == "cov")
            return MetricKind::pearson;
        if (t == "dcca")
            return MetricKind::dcca;
        if (t == "dpcca")
            return MetricKind::dpcca;
        throw UsageError("unknown correlation metric '" + std::string(text) + "'");
    }

    SchemeKind parse_scheme(std::string_view text)
    {
        const std::string t = lower(text);
        if (t == "ivp")
            return SchemeKind::ivp;
        if (t == "hrp")
            return SchemeKind::hrp;
        if (t == "cla")
            return SchemeKind::cla;
        if (t == "netmod")
            return SchemeKind::netmod;
        throw UsageError("unknown allocation scheme '" + std::string(text) + "'");
    }

    ReturnMatrix ReturnMatrix::slice(Index begin, Index end) const
    {
        return ReturnMatrix{values.middleRows(begin, end - begin), labels};
    }

    std::vector<std::string> default_labels(Index n)
    {
        std::vector<std::string> labels;
        labels.reserve(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i)
            labels.push_back("A" + std::to_string(i));
        return labels;
    }

    void validate_returns(const ReturnMatrix &returns)
    {
        if (returns.periods() < 2)
            throw InsufficientDataError("return matrix needs at least 2 periods, got " +
                                        std::to_string(returns.periods()));
        if (returns.assets() < 2)
            throw InsufficientDataError("return matrix needs at least 2 assets, got " +
                                        std::to_string(returns.assets()));
        if (static_cast<Index>(returns.labels.size()) != returns.assets())
            throw DimensionError("return matrix has " + std::to_string(returns.assets()) +
                                 " columns but " + std::to_string(returns.labels.size()) + " labels");
        for (Index j = 0; j < returns.assets(); ++j)
            for (Index t = 0; t < returns.periods(); ++t)
            {
                const double r = returns.values(t, j);
                if (!std::isfinite(r) || r <= -1.0)
                    throw DomainError("return " + std::to_string(r) + " at period " + std::to_string(t) +
                                      " of asset " + returns.labels[static_cast<std::size_t>(j)] +
                                      " is not a finite value above -1");
            }
    }

    bool weights_valid(const Eigen::VectorXd &w, double tolerance)
    {
        if (w.size() == 0 || !w.allFinite())
            return false;
        if (std::abs(w.sum() - 1.0) > tolerance)
            return false;
        return (w.array() >= -tolerance).all() && (w.array() <= 1.0 + tolerance).all();
    }
}
