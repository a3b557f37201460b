#include "plab/report.hpp"

#include "plab/error.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace plab
{
    namespace
    {
        using nlohmann::json;

        json opt(const std::optional<double> &v)
        {
            return v ? json(*v) : json(nullptr);
        }

        json vec(const Eigen::VectorXd &v)
        {
            return json(std::vector<double>(v.data(), v.data() + v.size()));
        }

        std::string num(double v)
        {
            std::array<char, 32> buf{};
            const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
            return std::string(buf.data(), res.ptr);
        }

        std::string num(const std::optional<double> &v)
        {
            return v ? num(*v) : std::string();
        }

        json summary(const Summary &s)
        {
            return {{"mean", opt(s.mean)}, {"std", opt(s.std)}, {"count", s.count}};
        }

        json distribution(const std::vector<AssetDistribution> &dist)
        {
            json out = json::array();
            for (const AssetDistribution &d : dist)
                out.push_back({{"asset", d.asset},
                               {"label", d.label},
                               {"mean", d.mean},
                               {"std", d.std},
                               {"min", d.min},
                               {"max", d.max}});
            return out;
        }
    }

    json to_json(const MetricRecord &m)
    {
        return {{"daily_ret_mean", opt(m.daily_return_mean)},
                {"daily_ret_std", opt(m.daily_return_std)},
                {"impr", opt(m.improvement)},
                {"clr", opt(m.clr)},
                {"nhhi", opt(m.nhhi)},
                {"pv", opt(m.pv)},
                {"dr", opt(m.dr)},
                {"sr", opt(m.sr)},
                {"var", opt(m.var)},
                {"cvar", opt(m.cvar)}};
    }

    json to_json(const RunReport &run)
    {
        json windows = json::array();
        for (const WindowRecord &w : run.windows)
            windows.push_back({{"alloc_time", w.interval.alloc_time},
                               {"begin", w.interval.begin},
                               {"end", w.interval.end},
                               {"weights", vec(w.weights)},
                               {"returns", w.returns},
                               {"pv", opt(w.pv)},
                               {"dr", opt(w.dr)},
                               {"nhhi", opt(w.nhhi)},
                               {"rc", w.rc.size() ? vec(w.rc) : json(nullptr)},
                               {"fallback", w.fallback.empty() ? json(nullptr) : json(w.fallback)}});
        return {{"method", run.method},
                {"run_index", run.run_index},
                {"seed", run.seed},
                {"labels", run.labels},
                {"parent", run.parent},
                {"metrics", to_json(run.metrics)},
                {"windows", std::move(windows)}};
    }

    json to_json(const CorpusReport &c)
    {
        json excluded = json::array();
        for (const ExcludedRun &e : c.excluded)
            excluded.push_back({{"run_index", e.run_index}, {"reason", e.reason}});
        return {{"method", c.method},
                {"runs_requested", c.runs_requested},
                {"runs_used", c.run_indices.size()},
                {"excluded", std::move(excluded)},
                {"fallback_windows", c.fallbacks},
                {"table", to_json(c.table_row())},
                {"summary",
                 {{"daily_ret_mean", summary(c.daily_return_mean)},
                  {"daily_ret_std", summary(c.daily_return_std)},
                  {"clr", summary(c.clr)},
                  {"nhhi", summary(c.nhhi)},
                  {"pv", summary(c.pv)},
                  {"dr", summary(c.dr)},
                  {"sr", summary(c.sr)},
                  {"var", summary(c.var)},
                  {"cvar", summary(c.cvar)}}},
                {"weights_dist", distribution(c.weights_dist)},
                {"rc_dist", distribution(c.rc_dist)}};
    }

    json to_json(const SweepReport &sweep, const std::string &config_echo)
    {
        json methods = json::array();
        for (const CorpusReport &c : sweep.methods)
            methods.push_back(to_json(c));
        return {{"config", config_echo},
                {"baseline", sweep.baseline.empty() ? json(nullptr) : json(sweep.baseline)},
                {"methods", std::move(methods)}};
    }

    std::string table_csv(const SweepReport &sweep)
    {
        std::string out = std::string(kTableHeader) + "\n";
        for (const CorpusReport &c : sweep.methods)
        {
            const MetricRecord m = c.table_row();
            out += c.method;
            for (const auto &v : {m.daily_return_mean, m.daily_return_std, m.improvement, m.clr, m.nhhi, m.pv, m.dr,
                                  m.sr, m.var, m.cvar})
                out += "," + num(v);
            out += "\n";
        }
        return out;
    }

    std::string returns_csv(const SweepReport &sweep)
    {
        std::size_t width = 0;
        for (const CorpusReport &c : sweep.methods)
            for (const auto &r : c.run_returns)
                width = std::max(width, r.size());
        std::string out = "method,run";
        for (std::size_t t = 0; t < width; ++t)
            out += ",r" + std::to_string(t);
        out += "\n";
        for (const CorpusReport &c : sweep.methods)
            for (std::size_t k = 0; k < c.run_returns.size(); ++k)
            {
                out += c.method + "," + std::to_string(c.run_indices[k]);
                for (double r : c.run_returns[k])
                    out += "," + num(r);
                out += "\n";
            }
        return out;
    }

    std::string distribution_csv(const SweepReport &sweep, bool risk_contributions)
    {
        std::string out = "method,rank,asset,label,mean,std,min,max\n";
        for (const CorpusReport &c : sweep.methods)
        {
            const auto &dist = risk_contributions ? c.rc_dist : c.weights_dist;
            for (std::size_t k = 0; k < dist.size(); ++k)
            {
                const AssetDistribution &d = dist[k];
                out += c.method + "," + std::to_string(k + 1) + "," + std::to_string(d.asset) + "," + d.label + "," +
                       num(d.mean) + "," + num(d.std) + "," + num(d.min) + "," + num(d.max) + "\n";
            }
        }
        return out;
    }

    std::string graph_edges_csv(std::span<const GraphDump> dumps)
    {
        std::string out = "window,alloc_time,metric,alpha,i,j,weight\n";
        for (const GraphDump &d : dumps)
        {
            const Eigen::MatrixXd &a = d.graph.adjacency;
            for (Index i = 0; i < a.rows(); ++i)
                for (Index j = i + 1; j < a.cols(); ++j)
                    if (a(i, j) != 0.0)
                        out += std::to_string(d.window) + "," + std::to_string(d.interval.alloc_time) + "," +
                               std::string(metric_label(d.metric)) + "," + num(d.alpha) + "," + std::to_string(i) +
                               "," + std::to_string(j) + "," + num(a(i, j)) + "\n";
        }
        return out;
    }

    std::string graph_communities_csv(std::span<const GraphDump> dumps, std::span<const std::string> labels)
    {
        std::string out = "window,alloc_time,metric,alpha,asset,label,community\n";
        for (const GraphDump &d : dumps)
            for (std::size_t i = 0; i < labels.size(); ++i)
            {
                const std::string community =
                    i < d.partition.community_of.size() ? std::to_string(d.partition.community_of[i]) : std::string();
                out += std::to_string(d.window) + "," + std::to_string(d.interval.alloc_time) + "," +
                       std::string(metric_label(d.metric)) + "," + num(d.alpha) + "," + std::to_string(i) + "," +
                       labels[i] + "," + community + "\n";
            }
        return out;
    }

    void write_text(const std::filesystem::path &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out || !(out << text))
            throw Error("cannot write " + path.string());
    }

    void write_report_set(const std::filesystem::path &dir, const SweepReport &sweep, const std::string &config_echo)
    {
        std::filesystem::create_directories(dir);
        write_text(dir / "config.ini", config_echo);
        write_text(dir / "report.json", to_json(sweep, config_echo).dump(2) + "\n");
        write_text(dir / "table.csv", table_csv(sweep));
        write_text(dir / "returns_per_run.csv", returns_csv(sweep));
        write_text(dir / "weights_dist.csv", distribution_csv(sweep, false));
        write_text(dir / "rc_dist.csv", distribution_csv(sweep, true));
    }
}
