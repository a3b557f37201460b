#pragma once

#include "plab/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>

namespace plab
{
    /// Table column order: method, daily return mean/std, improvement, CLR,
    /// NHHI, PV, DR, SR, VaR, CVaR.
    inline constexpr const char *kTableHeader = "method,daily_ret_mean,daily_ret_std,impr,clr,nhhi,pv,dr,sr,var,cvar";

    nlohmann::json to_json(const MetricRecord &m);
    nlohmann::json to_json(const RunReport &run);
    nlohmann::json to_json(const CorpusReport &corpus);
    /// Full report: scenario echo, baseline, one entry per method.
    nlohmann::json to_json(const SweepReport &sweep, const std::string &config_echo);

    std::string table_csv(const SweepReport &sweep);
    /// One row per (method, run): method, run, then the out-of-sample returns.
    std::string returns_csv(const SweepReport &sweep);
    /// method, rank, asset, label, mean, std, min, max (rank 1 = largest mean).
    std::string distribution_csv(const SweepReport &sweep, bool risk_contributions);

    /// window, alloc_time, metric, alpha, i, j, weight
    std::string graph_edges_csv(std::span<const GraphDump> dumps);
    /// window, alloc_time, metric, alpha, asset, label, community (empty on error)
    std::string graph_communities_csv(std::span<const GraphDump> dumps, std::span<const std::string> labels);

    /// config.ini, report.json, table.csv, returns_per_run.csv,
    /// weights_dist.csv, rc_dist.csv. Creates `dir` when needed.
    void write_report_set(const std::filesystem::path &dir, const SweepReport &sweep, const std::string &config_echo);

    void write_text(const std::filesystem::path &path, const std::string &text);
}
