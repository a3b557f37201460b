#include "plab/harness.hpp"

#include "plab/allocation.hpp"
#include "plab/error.hpp"
#include "plab/netmod.hpp"
#include "plab/seeding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace plab
{
    namespace
    {
        // Memoized estimate; a failure is stored and rethrown to every user.
        template <typename T>
        class Memo
        {
        public:
            template <typename F>
            const T &get(F &&compute)
            {
                if (!done_)
                {
                    done_ = true;
                    try
                    {
                        value_.emplace(compute());
                    }
                    catch (...)
                    {
                        error_ = std::current_exception();
                    }
                }
                if (error_)
                    std::rethrow_exception(error_);
                return *value_;
            }

        private:
            bool done_ = false;
            std::optional<T> value_;
            std::exception_ptr error_;
        };

        struct WindowInputs
        {
            Memo<ReturnMatrix> recent_rows;
            Memo<ReturnMatrix> detrended_rows;
            Memo<CovarianceMatrix> cov;
            Memo<Eigen::VectorXd> mean;
            Memo<CorrelationMatrix> corr[3];
        };

        Index lookback_begin(Lookback policy, Index t, Index delta_t)
        {
            return policy == Lookback::recent ? std::max<Index>(0, t - delta_t) : 0;
        }

        class Estimator
        {
        public:
            Estimator(const ScenarioConfig &cfg, const ReturnMatrix &returns, Index t)
                : cfg_(cfg), returns_(returns), t_(t) {}

            const ReturnMatrix &cov_rows()
            {
                return in_.recent_rows.get([&] {
                    return returns_.slice(lookback_begin(cfg_.cov_lookback, t_, cfg_.delta_t), t_);
                });
            }

            const CovarianceMatrix &cov()
            {
                return in_.cov.get([&] {
                    return covariance(cov_rows(), lookback_begin(cfg_.cov_lookback, t_, cfg_.delta_t));
                });
            }

            const Eigen::VectorXd &mean()
            {
                return in_.mean.get([&] { return Eigen::VectorXd(cov_rows().values.colwise().mean().transpose()); });
            }

            const CorrelationMatrix &corr(MetricKind kind)
            {
                return in_.corr[static_cast<int>(kind)].get([&] {
                    if (kind == MetricKind::pearson)
                        return pearson_corr(cov(), returns_.labels);
                    const ReturnMatrix &rows = in_.detrended_rows.get([&] {
                        return returns_.slice(lookback_begin(cfg_.detrended_lookback, t_, cfg_.delta_t), t_);
                    });
                    DpccaOptions opts;
                    opts.ridge = cfg_.dpcca_ridge;
                    return correlation(rows, kind, cfg_.box_length, opts);
                });
            }

        private:
            const ScenarioConfig &cfg_;
            const ReturnMatrix &returns_;
            Index t_;
            WindowInputs in_;
        };

        Weights allocate(const ScenarioConfig &cfg, const Method &method, Estimator &est, std::uint64_t seed,
                         Index window)
        {
            switch (method.scheme)
            {
            case SchemeKind::ivp:
            {
                const Eigen::VectorXd sigma = est.cov().volatilities();
                if (method.metric == MetricKind::pearson)
                    return ivp_weights(sigma);
                // Volatilities of the variant-implied covariance sigma rho sigma.
                const Eigen::MatrixXd implied = sigma.asDiagonal() * est.corr(method.metric).values * sigma.asDiagonal();
                Weights w = ivp_weights(implied.diagonal().cwiseMax(0.0).cwiseSqrt());
                w.metric = method.metric;
                return w;
            }
            case SchemeKind::hrp:
                return hrp_weights(est.cov(), est.corr(method.metric));
            case SchemeKind::netmod:
                return netmod_weights(est.corr(method.metric), cfg.netmod_alpha,
                                      derive_seed(seed, static_cast<std::uint64_t>(window),
                                                  static_cast<std::uint64_t>(method.metric)));
            case SchemeKind::cla:
            {
                const CovarianceMatrix &cov = est.cov();
                const ClaConfig cla = ClaConfig::uniform(cov.values.rows(), cfg.cla_lower, cfg.cla_upper, cfg.cla_target);
                Weights w = cla_weights(cov, est.mean(), cla);
                w.metric = method.metric;
                return w;
            }
            }
            throw UsageError("unknown scheme");
        }

        template <typename F>
        std::optional<double> attempt(F &&f)
        {
            try
            {
                const double v = f();
                if (std::isfinite(v))
                    return v;
            }
            catch (const Error &)
            {
            }
            return std::nullopt;
        }

        void evaluate_window(WindowRecord &rec, const ReturnMatrix &returns)
        {
            const Interval &iv = rec.interval;
            const Eigen::VectorXd r = returns.values.middleRows(iv.begin, iv.end - iv.begin) * rec.weights;
            rec.returns.assign(r.data(), r.data() + r.size());
            rec.nhhi = attempt([&] { return nhhi(rec.weights); });
            if (iv.end - iv.begin < 2)
                return;
            const Eigen::MatrixXd cov = covariance(returns.slice(iv.begin, iv.end), iv.begin).values;
            rec.pv = attempt([&] { return portfolio_variance(rec.weights, cov); });
            if (rec.pv && *rec.pv > 0.0)
            {
                rec.dr = attempt([&] { return diversification_ratio(rec.weights, cov); });
                rec.rc = risk_contribution(rec.weights, cov);
            }
        }

        std::optional<double> window_mean(const std::vector<WindowRecord> &windows,
                                          std::optional<double> WindowRecord::*field)
        {
            double sum = 0.0;
            std::size_t count = 0;
            for (const WindowRecord &w : windows)
                if (w.*field)
                {
                    sum += *(w.*field);
                    ++count;
                }
            if (count == 0)
                return std::nullopt;
            return sum / static_cast<double>(count);
        }

        MetricRecord run_metrics(const RunReport &run, const ScenarioConfig &cfg)
        {
            MetricRecord m;
            const std::vector<double> &r = run.returns;
            if (!r.empty())
                m.daily_return_mean = mean(r);
            if (r.size() >= 2)
                m.daily_return_std = sample_std(r);
            m.clr = attempt([&] { return compound_log_return(r); });
            m.sr = attempt([&] { return sharpe_ratio(r, cfg.risk_free); });
            m.var = attempt([&] { return var_historical(r, cfg.var_alpha); });
            m.cvar = attempt([&] { return cvar_historical(r, cfg.var_alpha); });
            m.nhhi = window_mean(run.windows, &WindowRecord::nhhi);
            m.pv = window_mean(run.windows, &WindowRecord::pv);
            m.dr = window_mean(run.windows, &WindowRecord::dr);
            return m;
        }

        Summary summarize_field(const std::vector<RunReport> &runs, std::optional<double> MetricRecord::*field)
        {
            std::vector<double> xs;
            for (const RunReport &run : runs)
                if (run.metrics.*field)
                    xs.push_back(*(run.metrics.*field));
            Summary s;
            s.count = xs.size();
            if (!xs.empty())
            {
                s.mean = mean(xs);
                s.std = sample_std(xs);
            }
            return s;
        }

        std::vector<AssetDistribution> distribution(const std::vector<RunReport> &runs, bool risk)
        {
            if (runs.empty())
                return {};
            const Index n = static_cast<Index>(runs.front().labels.size());
            std::vector<std::vector<double>> pooled(static_cast<std::size_t>(n));
            for (const RunReport &run : runs)
                for (const WindowRecord &w : run.windows)
                {
                    const Eigen::VectorXd &v = risk ? w.rc : w.weights;
                    if (v.size() != n)
                        continue;
                    for (Index i = 0; i < n; ++i)
                        pooled[static_cast<std::size_t>(i)].push_back(v(i));
                }

            std::vector<AssetDistribution> out;
            for (Index i = 0; i < n; ++i)
            {
                const auto &xs = pooled[static_cast<std::size_t>(i)];
                if (xs.empty())
                    continue;
                AssetDistribution d;
                d.asset = i;
                d.label = runs.front().labels[static_cast<std::size_t>(i)];
                d.mean = mean(xs);
                d.std = sample_std(xs);
                d.min = *std::min_element(xs.begin(), xs.end());
                d.max = *std::max_element(xs.begin(), xs.end());
                out.push_back(std::move(d));
            }
            std::stable_sort(out.begin(), out.end(),
                             [](const AssetDistribution &a, const AssetDistribution &b) { return a.mean > b.mean; });
            return out;
        }

        void validate_common(const ScenarioConfig &cfg)
        {
            if (cfg.num_iters < 1)
                throw ConfigError("scenario.num_iters", "must be at least 1");
            if (cfg.delta_t < 2)
                throw ConfigError("scenario.delta_t", "must be at least 2");
            if (cfg.box_length < 2)
                throw ConfigError("scenario.box_length", "must be at least 2");
            if (!(cfg.netmod_alpha >= -1.0 && cfg.netmod_alpha < 1.0))
                throw ConfigError("scenario.netmod_alpha", "must lie in [-1, 1)");
            if (!(cfg.var_alpha > 0.0 && cfg.var_alpha < 1.0))
                throw ConfigError("scenario.var_alpha", "must lie in (0, 1)");
            if (!std::isfinite(cfg.risk_free))
                throw ConfigError("scenario.risk_free", "must be finite");
            if (!(cfg.dpcca_ridge >= 0.0))
                throw ConfigError("scenario.dpcca_ridge", "must be non-negative");
            if (cfg.methods.empty())
                throw ConfigError("scenario.methods", "at least one method is required");
            for (std::size_t i = 0; i < cfg.methods.size(); ++i)
                for (std::size_t j = 0; j < i; ++j)
                    if (cfg.methods[i] == cfg.methods[j])
                        throw ConfigError("scenario.methods", "duplicate method " + cfg.methods[i].id());
            if (!(cfg.cla_lower >= 0.0 && cfg.cla_lower <= cfg.cla_upper && cfg.cla_upper <= 1.0))
                throw ConfigError("cla.lower_bound", "need 0 <= lower_bound <= upper_bound <= 1");
            if (cfg.cla_target && !std::isfinite(*cfg.cla_target))
                throw ConfigError("cla.target_return", "must be finite");
        }

        void check_cla_bounds(const ScenarioConfig &cfg, Index n)
        {
            const double dn = static_cast<double>(n);
            if (cfg.cla_lower * dn > 1.0 + 1e-12)
                throw ConfigError("cla.lower_bound", "lower bounds sum above 1");
            if (cfg.cla_upper * dn < 1.0 - 1e-12)
                throw ConfigError("cla.upper_bound", "upper bounds sum below 1");
        }
    }

    std::string Method::id() const
    {
        return std::string(to_string(scheme)) + "-" + std::string(metric_label(metric));
    }

    Method Method::parse(std::string_view id)
    {
        const auto dash = id.find('-');
        if (dash == std::string_view::npos)
            throw UsageError("method '" + std::string(id) + "' is not of the form scheme-metric");
        Method m{parse_scheme(id.substr(0, dash)), parse_metric(id.substr(dash + 1))};
        if (m.scheme == SchemeKind::cla && m.metric != MetricKind::pearson)
            throw UsageError("CLA only runs on the covariance: '" + std::string(id) + "'");
        return m;
    }

    std::vector<Method> standard_methods()
    {
        std::vector<Method> out{{SchemeKind::cla, MetricKind::pearson}};
        for (SchemeKind s : {SchemeKind::ivp, SchemeKind::hrp, SchemeKind::netmod})
            for (MetricKind k : {MetricKind::pearson, MetricKind::dcca, MetricKind::dpcca})
                out.push_back({s, k});
        return out;
    }

    std::string_view to_string(Lookback lookback)
    {
        return lookback == Lookback::recent ? "recent" : "full";
    }

    Lookback parse_lookback(std::string_view text)
    {
        if (text == "recent")
            return Lookback::recent;
        if (text == "full")
            return Lookback::full;
        throw UsageError("lookback must be 'recent' or 'full', got '" + std::string(text) + "'");
    }

    void validate_backtest(const ScenarioConfig &cfg)
    {
        validate_common(cfg);
    }

    void validate(const ScenarioConfig &cfg)
    {
        validate_common(cfg);
        if (cfg.sim_length < 2 * cfg.delta_t)
            throw ConfigError("scenario.sim_length", "need sim_length >= 2 * delta_t (" +
                                                         std::to_string(cfg.sim_length) + " < " +
                                                         std::to_string(2 * cfg.delta_t) + ")");
        try
        {
            plab::validate(cfg.generator);
        }
        catch (const ConfigError &e)
        {
            // Generator checks report bare field names; qualify them with their config section.
            std::string section(generator_name(cfg.generator));
            if (section == "arfima_shocks")
            {
                static const std::set<std::string> shock_keys{"max_shocks", "mixing_beta", "max_duration_fraction",
                                                              "num_mixed_pairs", "mixing_pairs"};
                section = shock_keys.contains(e.field()) ? "shocks" : "arfima";
            }
            const std::string what = e.what();
            throw ConfigError(section + "." + e.field(), what.substr(e.field().size() + 2));
        }
        const Index columns = column_count(cfg.generator);
        if (columns != cfg.num_assets)
            throw ConfigError("scenario.num_assets", "generator emits " + std::to_string(columns) +
                                                         " columns but num_assets is " + std::to_string(cfg.num_assets));
        if (cfg.num_assets < 2)
            throw ConfigError("scenario.num_assets", "must be at least 2");
        check_cla_bounds(cfg, cfg.num_assets);
    }

    std::vector<Interval> divide_intervals(Index periods, Index delta_t)
    {
        if (delta_t < 1 || periods < 2 * delta_t)
            throw InsufficientDataError("need at least 2 * delta_t = " + std::to_string(2 * delta_t) +
                                        " periods, got " + std::to_string(periods));
        std::vector<Interval> out;
        for (Index k = 1; k <= (periods - 1) / delta_t; ++k)
        {
            const Index t = k * delta_t;
            out.push_back({t, t, std::min(t + delta_t, periods)});
        }
        return out;
    }

    std::uint64_t run_seed(const ScenarioConfig &cfg, Index run_index)
    {
        return derive_seed(cfg.master_seed, static_cast<std::uint64_t>(run_index));
    }

    Trace run_trace(const ScenarioConfig &cfg, Index run_index)
    {
        return generate(cfg.generator, cfg.sim_length, run_seed(cfg, run_index));
    }

    std::vector<RunReport> run_methods(const ScenarioConfig &cfg, const std::vector<Method> &methods,
                                       const ReturnMatrix &returns, Index run_index)
    {
        validate_returns(returns);
        check_cla_bounds(cfg, returns.assets());
        const std::vector<Interval> intervals = divide_intervals(returns.periods(), cfg.delta_t);
        const std::uint64_t seed = run_seed(cfg, run_index);
        const Index n = returns.assets();

        std::vector<RunReport> reports(methods.size());
        for (std::size_t m = 0; m < methods.size(); ++m)
        {
            reports[m].method = methods[m].id();
            reports[m].run_index = run_index;
            reports[m].seed = seed;
            reports[m].labels = returns.labels;
        }

        for (std::size_t k = 0; k < intervals.size(); ++k)
        {
            Estimator est(cfg, returns, intervals[k].alloc_time);
            for (std::size_t m = 0; m < methods.size(); ++m)
            {
                RunReport &run = reports[m];
                WindowRecord rec;
                rec.interval = intervals[k];
                try
                {
                    Weights w = allocate(cfg, methods[m], est, seed, static_cast<Index>(k));
                    if (!w.values.allFinite() || !weights_valid(w.values))
                        throw DomainError("allocation produced invalid weights");
                    rec.weights = std::move(w.values);
                }
                catch (const Error &e)
                {
                    const bool first = run.windows.empty();
                    rec.weights = first ? Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))
                                        : run.windows.back().weights;
                    rec.fallback = std::string(e.kind()) + ": " + e.what() +
                                   (first ? " (equal weights)" : " (previous weights)");
                }
                evaluate_window(rec, returns);
                run.returns.insert(run.returns.end(), rec.returns.begin(), rec.returns.end());
                run.windows.push_back(std::move(rec));
            }
        }
        for (RunReport &run : reports)
            run.metrics = run_metrics(run, cfg);
        return reports;
    }

    RunReport run_single(const ScenarioConfig &cfg, const Method &method, const ReturnMatrix &returns, Index run_index)
    {
        return std::move(run_methods(cfg, {method}, returns, run_index).front());
    }

    RunReport run_single(const ScenarioConfig &cfg, const Method &method, Index run_index)
    {
        const Trace trace = run_trace(cfg, run_index);
        RunReport report = run_single(cfg, method, trace.returns, run_index);
        report.parent = trace.parent;
        return report;
    }

    MetricRecord CorpusReport::table_row() const
    {
        MetricRecord r;
        r.daily_return_mean = daily_return_mean.mean;
        r.daily_return_std = daily_return_std.mean;
        r.improvement = improvement;
        r.clr = clr.mean;
        r.nhhi = nhhi.mean;
        r.pv = pv.mean;
        r.dr = dr.mean;
        r.sr = sr.mean;
        r.var = var.mean;
        r.cvar = cvar.mean;
        return r;
    }

    CorpusReport summarize(const std::string &method, Index runs_requested, const std::vector<RunReport> &runs,
                           const std::vector<ExcludedRun> &excluded)
    {
        CorpusReport c;
        c.method = method;
        c.runs_requested = runs_requested;
        c.excluded = excluded;
        c.daily_return_mean = summarize_field(runs, &MetricRecord::daily_return_mean);
        c.daily_return_std = summarize_field(runs, &MetricRecord::daily_return_std);
        c.clr = summarize_field(runs, &MetricRecord::clr);
        c.nhhi = summarize_field(runs, &MetricRecord::nhhi);
        c.pv = summarize_field(runs, &MetricRecord::pv);
        c.dr = summarize_field(runs, &MetricRecord::dr);
        c.sr = summarize_field(runs, &MetricRecord::sr);
        c.var = summarize_field(runs, &MetricRecord::var);
        c.cvar = summarize_field(runs, &MetricRecord::cvar);
        for (const RunReport &run : runs)
        {
            for (const WindowRecord &w : run.windows)
                if (!w.fallback.empty())
                    ++c.fallbacks;
            c.run_indices.push_back(run.run_index);
            c.run_returns.push_back(run.returns);
        }
        c.weights_dist = distribution(runs, false);
        c.rc_dist = distribution(runs, true);
        return c;
    }

    SweepReport run_sweep(const ScenarioConfig &cfg, unsigned workers, const ProgressFn &progress)
    {
        validate(cfg);
        const Index total = cfg.num_iters;
        std::vector<std::vector<RunReport>> per_run(static_cast<std::size_t>(total));
        std::vector<std::string> failure(static_cast<std::size_t>(total));

        std::atomic<Index> next{0};
        std::atomic<Index> done{0};
        std::mutex progress_mutex;
        auto worker = [&] {
            for (Index r = next++; r < total; r = next++)
            {
                try
                {
                    const Trace trace = run_trace(cfg, r);
                    auto reports = run_methods(cfg, cfg.methods, trace.returns, r);
                    for (RunReport &rep : reports)
                        rep.parent = trace.parent;
                    per_run[static_cast<std::size_t>(r)] = std::move(reports);
                }
                catch (const std::exception &e)
                {
                    const auto *err = dynamic_cast<const Error *>(&e);
                    failure[static_cast<std::size_t>(r)] = std::string(err ? err->kind() : "error") + ": " + e.what();
                }
                const Index finished = ++done;
                if (progress)
                {
                    std::lock_guard lock(progress_mutex);
                    progress(finished, total);
                }
            }
        };

        if (workers == 0)
            workers = std::max(1u, std::thread::hardware_concurrency());
        workers = static_cast<unsigned>(std::min<Index>(workers, total));
        if (workers <= 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (unsigned i = 0; i < workers; ++i)
                pool.emplace_back(worker);
        }

        std::vector<ExcludedRun> excluded;
        for (Index r = 0; r < total; ++r)
            if (!failure[static_cast<std::size_t>(r)].empty())
                excluded.push_back({r, failure[static_cast<std::size_t>(r)]});

        SweepReport sweep;
        for (std::size_t m = 0; m < cfg.methods.size(); ++m)
        {
            std::vector<RunReport> runs;
            for (Index r = 0; r < total; ++r)
                if (failure[static_cast<std::size_t>(r)].empty())
                    runs.push_back(std::move(per_run[static_cast<std::size_t>(r)][m]));
            sweep.methods.push_back(summarize(cfg.methods[m].id(), total, runs, excluded));
        }
        apply_improvement(sweep);
        return sweep;
    }

    CorpusReport run_corpus(const ScenarioConfig &cfg, const Method &method, unsigned workers)
    {
        ScenarioConfig single = cfg;
        single.methods = {method};
        return std::move(run_sweep(single, workers).methods.front());
    }

    void apply_improvement(SweepReport &sweep, const std::string &baseline)
    {
        const auto base = std::find_if(sweep.methods.begin(), sweep.methods.end(),
                                       [&](const CorpusReport &c) { return c.method == baseline; });
        if (base == sweep.methods.end())
            return;
        sweep.baseline = baseline;
        const std::optional<double> b = base->daily_return_mean.mean;
        for (CorpusReport &c : sweep.methods)
        {
            c.improvement.reset();
            if (b && c.daily_return_mean.mean)
                c.improvement = attempt([&] { return plab::improvement(*c.daily_return_mean.mean, *b); });
        }
    }

    std::vector<GraphDump> netmod_dumps(const ScenarioConfig &cfg, const ReturnMatrix &returns, Index run_index,
                                        MetricKind metric, std::span<const double> alphas)
    {
        validate_returns(returns);
        const std::vector<Interval> intervals = divide_intervals(returns.periods(), cfg.delta_t);
        const std::uint64_t seed = run_seed(cfg, run_index);
        std::vector<GraphDump> out;
        for (std::size_t k = 0; k < intervals.size(); ++k)
        {
            Estimator est(cfg, returns, intervals[k].alloc_time);
            for (double alpha : alphas)
            {
                GraphDump d;
                d.window = static_cast<Index>(k);
                d.interval = intervals[k];
                d.metric = metric;
                d.alpha = alpha;
                try
                {
                    d.graph = build_threshold_graph(est.corr(metric), alpha);
                    d.partition = louvain_communities(
                        d.graph, derive_seed(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(metric)));
                }
                catch (const Error &e)
                {
                    d.error = std::string(e.kind()) + ": " + e.what();
                }
                out.push_back(std::move(d));
            }
        }
        return out;
    }
}
