// Command-line front end: simulate, backtest, dump-graph, list-schemes.

#include "plab/config.hpp"
#include "plab/data_io.hpp"
#include "plab/error.hpp"
#include "plab/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace
{
    enum Exit
    {
        kOk = 0,
        kValidation = 1,
        kUsage = 2,
        kRuntime = 3
    };

    struct Options
    {
        std::string config;
        std::string out;
        std::string prices;
        std::vector<std::string> overrides;
        std::optional<std::uint64_t> seed;
        std::optional<unsigned> workers;
        std::string metric = "pearson";
        std::vector<double> alphas;
        plab::Index run = 0;
        bool quiet = false;
    };

    std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw plab::ConfigError("config", "cannot open " + path);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }

    std::vector<std::string> overrides(const Options &o)
    {
        std::vector<std::string> all = o.overrides;
        if (o.seed)
            all.push_back("scenario.master_seed=" + std::to_string(*o.seed));
        return all;
    }

    plab::ScenarioConfig scenario(const Options &o, bool backtest)
    {
        const std::string text = o.config.empty() ? std::string() : read_file(o.config);
        return backtest ? plab::parse_backtest_config(text, overrides(o)) : plab::parse_config(text, overrides(o));
    }

    unsigned worker_count(const Options &o)
    {
        if (o.workers)
            return *o.workers;
        if (const char *env = std::getenv("PORTFOLIO_LAB_WORKERS"))
        {
            char *end = nullptr;
            const unsigned long v = std::strtoul(env, &end, 10);
            if (end == env || *end != '\0')
                throw plab::UsageError("PORTFOLIO_LAB_WORKERS must be a non-negative integer");
            return static_cast<unsigned>(v);
        }
        return 0;
    }

    int simulate(const Options &o)
    {
        const plab::ScenarioConfig cfg = scenario(o, false);
        plab::ProgressFn progress;
        if (!o.quiet)
            progress = [](plab::Index done, plab::Index total) {
                std::cerr << "\rrun " << done << "/" << total << (done == total ? "\n" : "") << std::flush;
            };
        const plab::SweepReport sweep = plab::run_sweep(cfg, worker_count(o), progress);
        plab::write_report_set(o.out, sweep, plab::echo_config(cfg));
        return kOk;
    }

    int backtest(const Options &o)
    {
        const plab::ScenarioConfig cfg = scenario(o, true);
        const plab::PriceTable table = plab::load_prices_csv(o.prices);
        const plab::SweepReport sweep = plab::run_backtest_sweep(table, cfg);
        plab::write_report_set(o.out, sweep, plab::echo_config(cfg));

        const plab::ReturnMatrix returns = plab::prices_to_returns(table);
        const std::vector<double> alphas{cfg.netmod_alpha};
        std::vector<plab::GraphDump> dumps;
        for (const plab::Method &m : cfg.methods)
            if (m.scheme == plab::SchemeKind::netmod)
            {
                auto more = plab::netmod_dumps(cfg, returns, 0, m.metric, alphas);
                dumps.insert(dumps.end(), more.begin(), more.end());
            }
        plab::write_text(std::filesystem::path(o.out) / "graph_edges.csv", plab::graph_edges_csv(dumps));
        plab::write_text(std::filesystem::path(o.out) / "graph_communities.csv",
                         plab::graph_communities_csv(dumps, returns.labels));
        return kOk;
    }

    int dump_graph(const Options &o)
    {
        const bool historical = !o.prices.empty();
        const plab::ScenarioConfig cfg = scenario(o, historical);
        const plab::MetricKind metric = plab::parse_metric(o.metric);
        if (o.run < 0 || (!historical && o.run >= cfg.num_iters))
            throw plab::UsageError("--run must lie in [0, num_iters)");

        const plab::ReturnMatrix returns = historical ? plab::prices_to_returns(plab::load_prices_csv(o.prices))
                                                      : plab::run_trace(cfg, o.run).returns;
        const std::vector<double> alphas = o.alphas.empty() ? std::vector<double>{cfg.netmod_alpha} : o.alphas;
        const auto dumps = plab::netmod_dumps(cfg, returns, historical ? 0 : o.run, metric, alphas);

        std::filesystem::create_directories(o.out);
        plab::write_text(std::filesystem::path(o.out) / "config.ini", plab::echo_config(cfg));
        plab::write_text(std::filesystem::path(o.out) / "graph_edges.csv", plab::graph_edges_csv(dumps));
        plab::write_text(std::filesystem::path(o.out) / "graph_communities.csv",
                         plab::graph_communities_csv(dumps, returns.labels));
        return kOk;
    }

    int list_schemes()
    {
        for (const plab::Method &m : plab::standard_methods())
            std::cout << m.id() << "\n";
        return kOk;
    }

    int report_error(const char *kind, const std::string &message, const std::string &field, int code)
    {
        nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
        if (!field.empty())
            j["field"] = field;
        std::cerr << j.dump() << std::endl;
        return code;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Monte-Carlo portfolio allocation lab"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", o.config, "Scenario file (defaults when omitted)");
        sub->add_option("--set", o.overrides, "Override section.key=value (repeatable)");
        sub->add_option("--seed", o.seed, "Master seed override");
    };

    CLI::App *sim = app.add_subcommand("simulate", "Run the method sweep on generated traces");
    common(sim);
    sim->add_option("--out", o.out, "Output directory")->required();
    sim->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
    sim->add_flag("--quiet", o.quiet, "No progress counter");

    CLI::App *bt = app.add_subcommand("backtest", "Run the method sweep on a price CSV");
    common(bt);
    bt->add_option("--prices", o.prices, "Price CSV (Date, tickers...)")->required();
    bt->add_option("--out", o.out, "Output directory")->required();

    CLI::App *dg = app.add_subcommand("dump-graph", "Write NetMod graphs and communities per window");
    common(dg);
    dg->add_option("--out", o.out, "Output directory")->required();
    dg->add_option("--prices", o.prices, "Use a price CSV instead of a generated trace");
    dg->add_option("--metric", o.metric, "pearson | dcca | dpcca");
    dg->add_option("--alphas", o.alphas, "Thresholds to sweep (default: scenario.netmod_alpha)")->delimiter(',');
    dg->add_option("--run", o.run, "Run index of the generated trace");

    CLI::App *ls = app.add_subcommand("list-schemes", "Print the method identifiers");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        return report_error("usage", e.what(), "", kUsage);
    }

    try
    {
        if (sim->parsed())
            return simulate(o);
        if (bt->parsed())
            return backtest(o);
        if (dg->parsed())
            return dump_graph(o);
        if (ls->parsed())
            return list_schemes();
    }
    catch (const plab::ConfigError &e)
    {
        return report_error(e.kind(), e.what(), e.field(), kValidation);
    }
    catch (const plab::UsageError &e)
    {
        return report_error(e.kind(), e.what(), "", kUsage);
    }
    catch (const plab::ParseError &e)
    {
        return report_error(e.kind(), e.what(), "", kValidation);
    }
    catch (const plab::OrderingError &e)
    {
        return report_error(e.kind(), e.what(), "", kValidation);
    }
    catch (const plab::Error &e)
    {
        return report_error(e.kind(), e.what(), "", kRuntime);
    }
    catch (const std::exception &e)
    {
        return report_error("runtime", e.what(), "", kRuntime);
    }
    return kUsage;
}
