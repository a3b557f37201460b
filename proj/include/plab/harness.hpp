#pragma once

#include "plab/cla.hpp"
#include "plab/correlation.hpp"
#include "plab/metrics.hpp"
#include "plab/netmod.hpp"
#include "plab/trace_gen.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <optional>
#include <string>
#include <vector>

namespace plab
{
    /// One allocation scheme fed by one dependence metric, e.g. "hrp-dcca".
    struct Method
    {
        SchemeKind scheme = SchemeKind::ivp;
        MetricKind metric = MetricKind::pearson;

        std::string id() const;
        /// Parses "<scheme>-<metric>"; throws UsageError on anything else.
        static Method parse(std::string_view id);

        friend bool operator==(const Method &, const Method &) = default;
    };

    /// CLA cov plus {IVP, HRP, NetMod} x {cov, dcca, dpcca}, in report order.
    std::vector<Method> standard_methods();

    /// Rows used to estimate inputs at allocation time t.
    enum class Lookback
    {
        /// [t - delta_t, t)
        recent,
        /// [0, t)
        full
    };

    std::string_view to_string(Lookback lookback);
    Lookback parse_lookback(std::string_view text);

    struct ScenarioConfig
    {
        Index num_iters = 100;
        Index sim_length = 520;
        Index delta_t = 60;
        Index num_assets = 32;
        GeneratorConfig generator = GaussianConfig{};
        std::vector<Method> methods = standard_methods();
        Index box_length = 60;
        double netmod_alpha = 0.3;
        double cla_lower = 0.0;
        double cla_upper = 1.0;
        std::optional<double> cla_target;
        std::uint64_t master_seed = 42;
        double var_alpha = 0.05;
        double risk_free = 0.0;
        /// Covariance, Pearson correlation and CLA expected returns.
        Lookback cov_lookback = Lookback::recent;
        /// DCCA and DPCCA.
        Lookback detrended_lookback = Lookback::full;
        double dpcca_ridge = 0.0;
    };

    /// Checks every scenario invariant; throws ConfigError naming the key.
    void validate(const ScenarioConfig &cfg);
    /// Same, minus the generator-dependent checks (historical backtests).
    void validate_backtest(const ScenarioConfig &cfg);

    struct Interval
    {
        Index alloc_time = 0;
        Index begin = 0;
        Index end = 0;
    };

    /// t_k = k delta_t for k = 1 .. floor((T - 1) / delta_t), evaluated on
    /// [t_k, min(t_{k+1}, T)). Throws InsufficientDataError when T < 2 delta_t.
    std::vector<Interval> divide_intervals(Index periods, Index delta_t);

    struct WindowRecord
    {
        Interval interval;
        Eigen::VectorXd weights;
        /// Out-of-sample portfolio returns w' r_t over the window.
        std::vector<double> returns;
        /// Evaluated on the window's own covariance; empty when undefined.
        std::optional<double> pv;
        std::optional<double> dr;
        std::optional<double> nhhi;
        Eigen::VectorXd rc;
        /// Non-empty when the allocation failed and earlier weights were carried.
        std::string fallback;
    };

    struct RunReport
    {
        std::string method;
        Index run_index = 0;
        std::uint64_t seed = 0;
        std::vector<std::string> labels;
        /// Parent column of each generated dependent column (-1 when
        /// independent); empty for historical data.
        std::vector<Index> parent;
        std::vector<WindowRecord> windows;
        /// Concatenation of the windows' returns.
        std::vector<double> returns;
        MetricRecord metrics;
    };

    /// Runs every method of `methods` on one return matrix. Inputs shared by
    /// several methods (covariance, each correlation) are estimated once per
    /// window. Throws on an invalid return matrix.
    std::vector<RunReport> run_methods(const ScenarioConfig &cfg, const std::vector<Method> &methods,
                                       const ReturnMatrix &returns, Index run_index);

    std::uint64_t run_seed(const ScenarioConfig &cfg, Index run_index);
    /// The trace of run `run_index`.
    Trace run_trace(const ScenarioConfig &cfg, Index run_index);

    RunReport run_single(const ScenarioConfig &cfg, const Method &method, Index run_index);
    RunReport run_single(const ScenarioConfig &cfg, const Method &method, const ReturnMatrix &returns,
                         Index run_index = 0);

    struct Summary
    {
        std::optional<double> mean;
        std::optional<double> std;
        std::size_t count = 0;
    };

    /// Distribution of one asset's weight (or risk contribution) over all
    /// windows and runs.
    struct AssetDistribution
    {
        Index asset = 0;
        std::string label;
        double mean = 0.0;
        double std = 0.0;
        double min = 0.0;
        double max = 0.0;
    };

    struct ExcludedRun
    {
        Index run_index = 0;
        std::string reason;
    };

    struct CorpusReport
    {
        std::string method;
        Index runs_requested = 0;
        std::vector<ExcludedRun> excluded;
        /// Across-run mean and std of each per-run metric.
        Summary daily_return_mean, daily_return_std, clr, nhhi, pv, dr, sr, var, cvar;
        /// Relative to the baseline method's mean daily return.
        std::optional<double> improvement;
        Index fallbacks = 0;
        /// Descending mean.
        std::vector<AssetDistribution> weights_dist;
        std::vector<AssetDistribution> rc_dist;
        /// Per included run, in run order.
        std::vector<Index> run_indices;
        std::vector<std::vector<double>> run_returns;

        /// Table row of across-run means.
        MetricRecord table_row() const;
    };

    /// Reduces per-run reports of one method (ordered by run index).
    CorpusReport summarize(const std::string &method, Index runs_requested, const std::vector<RunReport> &runs,
                           const std::vector<ExcludedRun> &excluded);

    struct SweepReport
    {
        std::vector<CorpusReport> methods;
        std::string baseline;
    };

    /// Invoked after each finished run with (done, total); called from worker threads.
    using ProgressFn = std::function<void(Index, Index)>;

    /// All configured methods over num_iters runs, one shared trace per run.
    /// Runs execute on `workers` threads (0 = hardware concurrency); the
    /// result does not depend on the worker count.
    SweepReport run_sweep(const ScenarioConfig &cfg, unsigned workers = 1, const ProgressFn &progress = {});

    /// One method over num_iters runs.
    CorpusReport run_corpus(const ScenarioConfig &cfg, const Method &method, unsigned workers = 1);

    /// Fills each report's improvement against `baseline` (default ivp-cov when present).
    void apply_improvement(SweepReport &sweep, const std::string &baseline = "ivp-cov");

    /// NetMod graph and communities of one rebalance window.
    struct GraphDump
    {
        Index window = 0;
        Interval interval;
        MetricKind metric = MetricKind::pearson;
        double alpha = 0.0;
        AssetGraph graph;
        Partition partition;
        /// Non-empty when the correlation could not be estimated.
        std::string error;
    };

    /// Rebuilds the NetMod inputs of every window for each threshold in
    /// `alphas`, with the same Louvain seeds as the allocation itself.
    std::vector<GraphDump> netmod_dumps(const ScenarioConfig &cfg, const ReturnMatrix &returns, Index run_index,
                                        MetricKind metric, std::span<const double> alphas);
}
